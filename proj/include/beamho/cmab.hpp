#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "beamho/radio.hpp"
#include "beamho/rng.hpp"

namespace beamho {

struct UntrainedAgentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct QTableFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Context {
    int serving_bs = 0;
    std::vector<double> access_rsrp; // deployment BS-id order
};

struct QuantizedContext {
    int serving_bs = 0;
    std::vector<int> bins;

    auto operator<=>(const QuantizedContext&) const = default;
};

// Values below floor_dbm collapse into one bin, mirroring a UE measurement
// reporting range: stations too weak to report are indistinguishable. The
// default matches the usual noise floor, where RSRP is clamped anyway.
inline QuantizedContext quantize(const Context& ctx, double bin_width_db,
                                 double floor_dbm = -140.0) {
    QuantizedContext q;
    q.serving_bs = ctx.serving_bs;
    q.bins.reserve(ctx.access_rsrp.size());
    for (double v : ctx.access_rsrp)
        q.bins.push_back(static_cast<int>(std::floor(std::max(v, floor_dbm) / bin_width_db)));
    return q;
}

struct AgentConfig {
    double epsilon = 1.0;              // exploration probability
    double bin_width_db = 1.0;         // context quantization step
    double context_floor_dbm = -140.0; // reporting range lower edge
    std::uint64_t max_steps = 1000000; // training step budget
    // Conservative evaluation for deployments whose context space stays
    // sparsely visited: only leave the strongest-access station when the
    // exact trained context holds evidence for it and a better alternative.
    bool anchored_eval = false;
};

// Running-average reward for one (context, action) pair.
struct ActionValue {
    int bs = 0;
    double mean_reward = 0.0;
    std::int64_t visit_count = 0;

    friend bool operator==(const ActionValue&, const ActionValue&) = default;
};

// Tabular Q-function over quantized contexts. Entries are kept sorted by
// (serving_bs, bins) so serialization order is stable.
class QTable {
public:
    using ActionList = std::vector<ActionValue>; // sorted by bs, visited actions only
    using EntryMap = std::map<QuantizedContext, ActionList>;

    double bin_width_db = 1.0;
    double context_floor_dbm = -140.0;
    std::string scenario_hash;
    std::uint64_t train_seed = 0;
    int action_count = 0; // number of BSs in the deployment

    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    const EntryMap& entries() const { return entries_; }

    std::int64_t total_visits() const {
        std::int64_t n = 0;
        for (const auto& [ctx, actions] : entries_)
            for (const auto& a : actions) n += a.visit_count;
        return n;
    }

    // Incremental mean update; creates the (s, a) record on first visit.
    void update(const QuantizedContext& s, int a, double reward) {
        ActionList& actions = entries_[s];
        auto it = std::lower_bound(actions.begin(), actions.end(), a,
                                   [](const ActionValue& v, int bs) { return v.bs < bs; });
        if (it == actions.end() || it->bs != a)
            it = actions.insert(it, ActionValue{a, 0.0, 0});
        it->mean_reward += (reward - it->mean_reward) / static_cast<double>(it->visit_count + 1);
        ++it->visit_count;
    }

    // Used by deserialization; action list must be sorted by bs.
    void insert_entry(QuantizedContext ctx, ActionList actions) {
        if (actions.empty())
            throw QTableFormatError("context entry with no actions");
        if (!std::is_sorted(actions.begin(), actions.end(),
                            [](const ActionValue& a, const ActionValue& b) { return a.bs < b.bs; }))
            throw QTableFormatError("action list not sorted by bs id");
        for (const auto& a : actions)
            if (a.visit_count < 1) throw QTableFormatError("action record with visit_count < 1");
        entries_[std::move(ctx)] = std::move(actions);
    }

    const ActionList* find(const QuantizedContext& s) const {
        auto it = entries_.find(s);
        return it == entries_.end() ? nullptr : &it->second;
    }

    friend bool operator==(const QTable& a, const QTable& b) {
        return a.bin_width_db == b.bin_width_db &&
               a.context_floor_dbm == b.context_floor_dbm &&
               a.scenario_hash == b.scenario_hash && a.train_seed == b.train_seed &&
               a.action_count == b.action_count && a.entries_ == b.entries_;
    }

private:
    EntryMap entries_;
};

// Nearest stored context by Euclidean distance over bin-center RSRP vectors.
// Entries sharing the probe's serving id are preferred; the search falls back
// to the whole table only when that partition is empty. Ties break toward the
// lexicographically smallest (serving_bs, bins).
inline QuantizedContext nearest_context(const QTable& q, const Context& probe) {
    if (q.empty()) throw UntrainedAgentError("untrained agent: Q-table is empty");
    QuantizedContext qp = quantize(probe, q.bin_width_db, q.context_floor_dbm);
    if (q.find(qp)) return qp; // exact quantized match, distance 0

    auto dist2 = [&](const QuantizedContext& c) {
        double d2 = 0.0;
        std::size_t n = std::min(c.bins.size(), qp.bins.size());
        for (std::size_t i = 0; i < n; ++i) {
            double d = static_cast<double>(c.bins[i] - qp.bins[i]);
            d2 += d * d;
        }
        return d2;
    };

    const auto& entries = q.entries();
    auto lo = entries.lower_bound(QuantizedContext{qp.serving_bs, {}});
    auto hi = entries.lower_bound(QuantizedContext{qp.serving_bs + 1, {}});
    if (lo == hi) { // no entry with this serving id: global scan
        lo = entries.begin();
        hi = entries.end();
    }
    auto best = lo;
    double best_d2 = dist2(lo->first);
    for (auto it = std::next(lo); it != hi; ++it) {
        double d2 = dist2(it->first);
        if (d2 < best_d2) { // strict: map order already gives the lexicographic tie-break
            best_d2 = d2;
            best = it;
        }
    }
    return best->first;
}

// Greedy action for a report: argmax of mean reward at the nearest stored
// context. Actions never observed there are excluded. Ties prefer the
// serving BS, then the lowest BS id.
inline int cmab_decide(const QTable& q, const MeasurementReport& report) {
    QuantizedContext c = nearest_context(q, Context{report.serving_bs, report.access_rsrp});
    const QTable::ActionList* actions = q.find(c);
    if (!actions || actions->empty())
        throw UntrainedAgentError("untrained agent: context has no recorded actions");
    int best = -1;
    double best_mean = 0.0;
    for (const auto& a : *actions) {
        bool better = best < 0 || a.mean_reward > best_mean ||
                      (a.mean_reward == best_mean && a.bs == report.serving_bs);
        if (better) {
            best = a.bs;
            best_mean = a.mean_reward;
        }
    }
    return best;
}

inline constexpr int kQTableSchemaVersion = 1;

inline nlohmann::ordered_json qtable_to_json(const QTable& q) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = kQTableSchemaVersion;
    doc["scenario_hash"] = q.scenario_hash;
    doc["train_seed"] = q.train_seed;
    doc["bin_width_db"] = q.bin_width_db;
    doc["context_floor_dbm"] = q.context_floor_dbm;
    doc["action_count"] = q.action_count;
    auto& entries = doc["entries"] = nlohmann::ordered_json::array();
    for (const auto& [ctx, actions] : q.entries()) {
        nlohmann::ordered_json e;
        e["serving"] = ctx.serving_bs;
        e["bins"] = ctx.bins;
        auto& acts = e["actions"] = nlohmann::ordered_json::array();
        for (const auto& a : actions) {
            nlohmann::ordered_json rec;
            rec["bs"] = a.bs;
            rec["mean"] = a.mean_reward;
            rec["count"] = a.visit_count;
            acts.push_back(std::move(rec));
        }
        entries.push_back(std::move(e));
    }
    return doc;
}

inline QTable qtable_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("schema_version"))
        throw QTableFormatError("not a Q-table document");
    int version = doc.at("schema_version").get<int>();
    if (version != kQTableSchemaVersion)
        throw QTableFormatError("unsupported Q-table schema_version " + std::to_string(version));
    QTable q;
    q.scenario_hash = doc.at("scenario_hash").get<std::string>();
    q.train_seed = doc.at("train_seed").get<std::uint64_t>();
    q.bin_width_db = doc.at("bin_width_db").get<double>();
    q.context_floor_dbm = doc.value("context_floor_dbm", -140.0);
    q.action_count = doc.at("action_count").get<int>();
    for (const auto& e : doc.at("entries")) {
        QuantizedContext ctx;
        ctx.serving_bs = e.at("serving").get<int>();
        ctx.bins = e.at("bins").get<std::vector<int>>();
        QTable::ActionList actions;
        for (const auto& a : e.at("actions"))
            actions.push_back(ActionValue{a.at("bs").get<int>(), a.at("mean").get<double>(),
                                          a.at("count").get<std::int64_t>()});
        q.insert_entry(std::move(ctx), std::move(actions));
    }
    return q;
}

inline void save_qtable(const QTable& q, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << qtable_to_json(q).dump(1) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline QTable load_qtable(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open Q-table file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw QTableFormatError("corrupt Q-table file " + path + ": " + e.what());
    }
    return qtable_from_json(doc);
}

}  // namespace beamho
