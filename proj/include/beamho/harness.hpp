#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "beamho/baseline.hpp"
#include "beamho/cmab.hpp"
#include "beamho/mobility.hpp"
#include "beamho/radio.hpp"
#include "beamho/rng.hpp"

namespace beamho {

struct UeState {
    Vec2 position;
    int serving_bs = 0;
    TttState ttt;
};

struct HistogramConfig {
    double lo_dbm = -140.0;
    double hi_dbm = 0.0;
    double bin_width_db = 0.5;

    int bin_count() const {
        return static_cast<int>(std::ceil((hi_dbm - lo_dbm) / bin_width_db));
    }
    int bin_of(double v) const {
        int b = static_cast<int>(std::floor((v - lo_dbm) / bin_width_db));
        return std::clamp(b, 0, bin_count() - 1);
    }
    double bin_left(int b) const { return lo_dbm + b * bin_width_db; }
};

struct EpisodeMetrics {
    int episode = 0;
    std::string policy_label;
    double mean_link_rsrp_dbm = 0.0; // averaged in the dB domain
    std::vector<std::int64_t> histogram;
    std::int64_t handover_count = 0;
    std::int64_t steps = 0;
};

struct ComparisonResult {
    std::vector<EpisodeMetrics> baseline;
    std::vector<EpisodeMetrics> cmab;
    std::vector<double> gain_db; // per paired episode, cmab minus baseline

    double mean_gain() const {
        double s = 0.0;
        for (double g : gain_db) s += g;
        return gain_db.empty() ? 0.0 : s / static_cast<double>(gain_db.size());
    }
    double min_gain() const {
        double m = gain_db.at(0);
        for (double g : gain_db) m = std::min(m, g);
        return m;
    }
    double max_gain() const {
        double m = gain_db.at(0);
        for (double g : gain_db) m = std::max(m, g);
        return m;
    }
};

// Handover decision interface. Position is passed alongside the report so
// test oracles (e.g. a genie that reads the radio map directly) can plug in;
// the real policies use only the report.
class Policy {
public:
    virtual ~Policy() = default;
    virtual int decide(const MeasurementReport& report, Vec2 pos) = 0;
    virtual std::string label() const = 0;
};

class BaselinePolicy final : public Policy {
public:
    explicit BaselinePolicy(BaselineConfig cfg) : cfg_(cfg) {}

    int decide(const MeasurementReport& report, Vec2) override {
        return baseline_decide(cfg_, report, ttt_);
    }
    std::string label() const override { return "baseline"; }

private:
    BaselineConfig cfg_;
    TttState ttt_;
};

class CmabPolicy final : public Policy {
public:
    explicit CmabPolicy(const QTable& table, bool anchored = false)
        : table_(table), anchored_(anchored) {}

    int decide(const MeasurementReport& report, Vec2) override {
        if (anchored_) return anchored_decide(report);
        QuantizedContext qp = quantize(Context{report.serving_bs, report.access_rsrp},
                                       table_.bin_width_db, table_.context_floor_dbm);
        auto it = memo_.find(qp);
        if (it != memo_.end()) return it->second;
        int action = cmab_decide(table_, report);
        memo_.emplace(std::move(qp), action);
        return action;
    }
    std::string label() const override { return "cmab"; }

private:
    // Sparse-table regime: deviating from the strongest-access station on a
    // distant table match is unreliable, so require the exact context to have
    // recorded both that station's reward and a strictly better alternative.
    int anchored_decide(const MeasurementReport& report) const {
        int anchor = 0;
        for (std::size_t i = 1; i < report.access_rsrp.size(); ++i)
            if (report.access_rsrp[i] > report.access_rsrp[static_cast<std::size_t>(anchor)])
                anchor = static_cast<int>(i);
        const QTable::ActionList* actions =
            table_.find(quantize(Context{report.serving_bs, report.access_rsrp},
                                 table_.bin_width_db, table_.context_floor_dbm));
        if (!actions) return anchor;
        const ActionValue* anchor_rec = nullptr;
        const ActionValue* best = nullptr;
        for (const auto& a : *actions) {
            if (a.bs == anchor) anchor_rec = &a;
            if (!best || a.mean_reward > best->mean_reward) best = &a;
        }
        if (!anchor_rec || best->mean_reward <= anchor_rec->mean_reward) return anchor;
        return best->bs;
    }

    const QTable& table_;
    bool anchored_ = false;
    std::map<QuantizedContext, int> memo_; // nearest-context search is the hot path
};

// One epsilon-greedy training interaction: pick an action, observe the
// link-beam reward of the chosen BS, fold it into the table, hand over.
inline std::pair<int, double> explore_step(const AgentConfig& cfg, QTable& table,
                                           const Deployment& dep, UeState& ue, Rng& rng) {
    MeasurementReport report = measure(dep, ue.position, ue.serving_bs);
    int n = static_cast<int>(dep.stations.size());
    QuantizedContext s = quantize(Context{report.serving_bs, report.access_rsrp},
                                  table.bin_width_db, table.context_floor_dbm);
    int action;
    if (rng.next_double() < cfg.epsilon) {
        action = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    } else {
        const QTable::ActionList* known = table.find(s);
        if (!known || known->empty()) {
            // unseen state: fall back to a uniform random action
            action = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
        } else {
            action = cmab_decide(table, report);
        }
    }
    double reward = best_link_rsrp(dep, action, ue.position);
    table.update(s, action, reward);
    ue.serving_bs = action;
    return {action, reward};
}

// Offline training: a reflecting random walk with periodic relocation
// (relocate_every = 0 disables), epsilon-greedy exploration at every step.
inline QTable train(const Deployment& dep, const AgentConfig& cfg,
                    const MobilityModel& walk, std::uint64_t master_seed,
                    std::uint64_t steps, std::uint64_t relocate_every = 10000) {
    if (steps < 1) throw ValidationError("train: steps must be >= 1");
    QTable table;
    table.bin_width_db = cfg.bin_width_db;
    table.context_floor_dbm = cfg.context_floor_dbm;
    table.train_seed = master_seed;
    table.action_count = static_cast<int>(dep.stations.size());

    Rng walk_rng(substream_seed(master_seed, "training-walk"));
    Rng explore_rng(substream_seed(master_seed, "agent-exploration"));

    UeState ue;
    auto relocate = [&] {
        ue.position = {walk_rng.uniform(dep.bounds.xmin, dep.bounds.xmax),
                       walk_rng.uniform(dep.bounds.ymin, dep.bounds.ymax)};
        if (walk.variant == MobilityVariant::Lattice) {
            // keep lattice worlds exactly on the step grid
            auto snap = [&](double v, double lo, double hi) {
                double s = lo + walk.step_m * std::round((v - lo) / walk.step_m);
                return std::clamp(s, lo, hi);
            };
            ue.position = {snap(ue.position.x, dep.bounds.xmin, dep.bounds.xmax),
                           snap(ue.position.y, dep.bounds.ymin, dep.bounds.ymax)};
        }
        ue.serving_bs = argmax_access_bs(dep, ue.position);
    };
    relocate();
    for (std::uint64_t t = 0; t < steps; ++t) {
        if (relocate_every > 0 && t > 0 && t % relocate_every == 0) relocate();
        explore_step(cfg, table, dep, ue, explore_rng);
        ue.position = mobility_step(walk, ue.position, dep.bounds, walk_rng);
    }
    return table;
}

inline void write_trace_header(std::ostream& out) {
    out << "step,x,y,policy,serving_bs,p_l_dbm\n";
}

inline std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// One evaluation episode. The mobility stream depends only on the seed, so
// two policies run with the same seed traverse identical positions.
inline EpisodeMetrics run_episode(const Deployment& dep, Policy& policy,
                                  const MobilityModel& mobility, std::uint64_t seed,
                                  std::int64_t steps, int episode_index = 0,
                                  const HistogramConfig& hist = {},
                                  std::ostream* trace = nullptr) {
    EpisodeMetrics m;
    m.episode = episode_index;
    m.policy_label = policy.label();
    m.histogram.assign(static_cast<std::size_t>(hist.bin_count()), 0);
    m.steps = steps;

    Rng rng(seed);
    UeState ue;
    ue.position = {rng.uniform(dep.bounds.xmin, dep.bounds.xmax),
                   rng.uniform(dep.bounds.ymin, dep.bounds.ymax)};
    ue.serving_bs = argmax_access_bs(dep, ue.position);

    double sum_pl = 0.0;
    for (std::int64_t t = 0; t < steps; ++t) {
        MeasurementReport report = measure(dep, ue.position, ue.serving_bs);
        int target = policy.decide(report, ue.position);
        if (target != ue.serving_bs) {
            ue.serving_bs = target;
            ++m.handover_count;
        }
        double pl = best_link_rsrp(dep, ue.serving_bs, ue.position);
        sum_pl += pl;
        ++m.histogram[static_cast<std::size_t>(hist.bin_of(pl))];
        if (trace)
            *trace << t << ',' << fmt6(ue.position.x) << ',' << fmt6(ue.position.y) << ','
                   << m.policy_label << ',' << ue.serving_bs << ',' << fmt6(pl) << '\n';
        ue.position = mobility_step(mobility, ue.position, dep.bounds, rng);
    }
    m.mean_link_rsrp_dbm = sum_pl / static_cast<double>(steps);
    return m;
}

// Paired evaluation: for each episode the baseline and the agent replay the
// identical trajectory, so the gain isolates the handover policy.
inline ComparisonResult compare(const Deployment& dep, const QTable& table,
                                int episodes, std::uint64_t master_seed,
                                const MobilityModel& mobility,
                                BaselineConfig baseline_cfg = {0.0, 0},
                                std::int64_t steps_per_episode = 10000,
                                const HistogramConfig& hist = {}, int jobs = 1,
                                bool anchored_eval = false) {
    if (episodes < 1) throw ValidationError("compare: episodes must be >= 1");
    ComparisonResult result;
    result.baseline.resize(static_cast<std::size_t>(episodes));
    result.cmab.resize(static_cast<std::size_t>(episodes));
    result.gain_db.resize(static_cast<std::size_t>(episodes));

    auto run_one = [&](int i) {
        std::uint64_t seed = substream_seed(master_seed, "eval-walk",
                                            static_cast<std::uint64_t>(i));
        BaselinePolicy bp(baseline_cfg);
        CmabPolicy cp(table, anchored_eval);
        auto idx = static_cast<std::size_t>(i);
        result.baseline[idx] = run_episode(dep, bp, mobility, seed, steps_per_episode, i, hist);
        result.cmab[idx] = run_episode(dep, cp, mobility, seed, steps_per_episode, i, hist);
        result.gain_db[idx] =
            result.cmab[idx].mean_link_rsrp_dbm - result.baseline[idx].mean_link_rsrp_dbm;
    };

    if (jobs <= 1) {
        for (int i = 0; i < episodes; ++i) run_one(i);
    } else {
        std::vector<std::thread> workers;
        std::size_t nworkers = std::min<std::size_t>(static_cast<std::size_t>(jobs),
                                                     static_cast<std::size_t>(episodes));
        for (std::size_t w = 0; w < nworkers; ++w)
            workers.emplace_back([&, w] {
                for (int i = static_cast<int>(w); i < episodes; i += static_cast<int>(nworkers))
                    run_one(i);
            });
        for (auto& t : workers) t.join();
    }
    return result;
}

// ---- CSV emission -------------------------------------------------------

inline void write_episode_csv(const std::vector<EpisodeMetrics>& metrics, std::ostream& out) {
    out << "episode,policy,mean_pl_dbm,handovers\n";
    for (const auto& m : metrics)
        out << m.episode << ',' << m.policy_label << ',' << fmt6(m.mean_link_rsrp_dbm) << ','
            << m.handover_count << '\n';
}

inline void write_gain_csv(const ComparisonResult& result, std::ostream& out) {
    out << "episode,gain_db\n";
    for (std::size_t i = 0; i < result.gain_db.size(); ++i)
        out << i << ',' << fmt6(result.gain_db[i]) << '\n';
}

// Aggregates per-episode histograms of one policy into a single table.
inline void write_histogram_csv(const std::vector<EpisodeMetrics>& metrics,
                                const HistogramConfig& hist, std::ostream& out,
                                bool header = true) {
    if (header) out << "bin_left_dbm,count,policy\n";
    if (metrics.empty()) return;
    std::vector<std::int64_t> total(metrics.front().histogram.size(), 0);
    for (const auto& m : metrics)
        for (std::size_t b = 0; b < m.histogram.size(); ++b) total[b] += m.histogram[b];
    for (std::size_t b = 0; b < total.size(); ++b) {
        if (total[b] == 0) continue; // sparse output, empty bins omitted
        out << fmt6(hist.bin_left(static_cast<int>(b))) << ',' << total[b] << ','
            << metrics.front().policy_label << '\n';
    }
}

}  // namespace beamho
