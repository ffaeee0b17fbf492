#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "beamho/cmab.hpp"
#include "beamho/rng.hpp"

using namespace beamho;

namespace {

QuantizedContext ctx(int serving, std::vector<int> bins) {
    return QuantizedContext{serving, std::move(bins)};
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("quantize floors onto the bin lattice") {
    Context c{2, {-83.2, -70.0, -0.5}};
    QuantizedContext q = quantize(c, 1.0);
    CHECK(q.serving_bs == 2);
    CHECK(q.bins == std::vector<int>{-84, -70, -1});
}

TEST_CASE("quantize is the identity on lattice points") {
    Context c{0, {-84.0, -70.0, -100.0}};
    CHECK(quantize(c, 1.0).bins == std::vector<int>{-84, -70, -100});
}

TEST_CASE("quantize collapses values below the reporting floor into one bin") {
    Context a{0, {-70.0, -112.3, -131.8}};
    Context b{0, {-70.0, -101.0, -120.0}};
    CHECK(quantize(a, 2.0, -100.0) == quantize(b, 2.0, -100.0));
    CHECK(quantize(a, 2.0, -100.0).bins == std::vector<int>{-35, -50, -50});
    // the default floor matches the RSRP clamp, so it never separates values
    CHECK(quantize(a, 2.0) != quantize(b, 2.0));
    CHECK(quantize(a, 2.0).bins == std::vector<int>{-35, -57, -66});
}

TEST_CASE("contexts inside one bin collapse to the same quantized context") {
    // both entries straddle no bin edge: [-83, -82) and [-71, -70)
    Context a{1, {-82.9, -70.95}};
    Context b{1, {-82.2, -70.05}};
    CHECK(quantize(a, 1.0) == quantize(b, 1.0));
    Context c{1, {-83.05, -70.95}}; // first entry crosses an edge
    CHECK(quantize(a, 1.0) != quantize(c, 1.0));
}

TEST_CASE("update: first reward becomes the mean with count 1") {
    QTable q;
    q.update(ctx(0, {-80}), 1, -70.0);
    const auto* actions = q.find(ctx(0, {-80}));
    REQUIRE(actions);
    REQUIRE(actions->size() == 1);
    CHECK((*actions)[0].mean_reward == -70.0);
    CHECK((*actions)[0].visit_count == 1);
}

TEST_CASE("update: two rewards average") {
    QTable q;
    q.update(ctx(0, {-80}), 1, -70.0);
    q.update(ctx(0, {-80}), 1, -60.0);
    const auto* actions = q.find(ctx(0, {-80}));
    CHECK((*actions)[0].mean_reward == doctest::Approx(-65.0).epsilon(1e-12));
    CHECK((*actions)[0].visit_count == 2);
}

TEST_CASE("incremental mean tracks the batch mean within 1e-9") {
    QTable q;
    Rng rng(31);
    std::vector<double> rewards;
    for (int i = 0; i < 1000; ++i) {
        double r = rng.uniform(-120.0, -40.0);
        rewards.push_back(r);
        q.update(ctx(0, {-80}), 0, r);
    }
    double batch = 0.0;
    for (double r : rewards) batch += r;
    batch /= static_cast<double>(rewards.size());
    CHECK(std::abs((*q.find(ctx(0, {-80})))[0].mean_reward - batch) < 1e-9);
}

TEST_CASE("mean is order-independent over reward permutations") {
    Rng rng(8);
    std::vector<double> rewards;
    for (int i = 0; i < 200; ++i) rewards.push_back(rng.uniform(-120.0, -40.0));

    auto mean_of = [&](const std::vector<double>& rs) {
        QTable q;
        for (double r : rs) q.update(ctx(0, {-80}), 0, r);
        return (*q.find(ctx(0, {-80})))[0].mean_reward;
    };
    double forward = mean_of(rewards);
    std::vector<double> shuffled = rewards;
    // deterministic Fisher-Yates
    Rng shuffle_rng(17);
    for (std::size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[shuffle_rng.next_below(i)]);
    CHECK(std::abs(mean_of(shuffled) - forward) < 1e-9);
}

TEST_CASE("nearest_context on an exact probe returns it at distance 0") {
    QTable q;
    q.update(ctx(0, {-80, -90}), 0, -70.0);
    q.update(ctx(0, {-85, -95}), 0, -72.0);
    Context probe{0, {-79.5, -89.5}}; // quantizes onto the first entry
    CHECK(nearest_context(q, probe) == ctx(0, {-80, -90}));
}

TEST_CASE("nearest_context picks the hand-computed minimum of three") {
    QTable q;
    q.update(ctx(0, {-80, -90}), 0, -70.0);
    q.update(ctx(0, {-83, -91}), 0, -70.0);
    q.update(ctx(0, {-100, -60}), 0, -70.0);
    // probe bins (-85, -92): d2 to entries = 29, 5, 1249
    Context probe{0, {-84.5, -91.5}};
    CHECK(nearest_context(q, probe) == ctx(0, {-83, -91}));
}

TEST_CASE("nearest_context prefers entries with the probe's serving id") {
    QTable q;
    q.update(ctx(0, {-80, -90}), 0, -70.0);   // numerically identical bins
    q.update(ctx(1, {-120, -50}), 0, -70.0);  // only entry for serving 1
    Context probe{1, {-79.8, -89.7}};
    // a distance-0 entry exists under serving 0, but the partition rule wins
    CHECK(nearest_context(q, probe) == ctx(1, {-120, -50}));
}

TEST_CASE("nearest_context falls back to a global scan for unknown serving ids") {
    QTable q;
    q.update(ctx(0, {-80, -90}), 0, -70.0);
    Context probe{7, {-79.8, -89.7}};
    CHECK(nearest_context(q, probe) == ctx(0, {-80, -90}));
}

TEST_CASE("nearest_context matches an O(N) brute-force scan on random tables") {
    Rng rng(555);
    QTable q;
    const int dim = 4;
    std::vector<QuantizedContext> stored;
    for (int i = 0; i < 300; ++i) {
        QuantizedContext c;
        c.serving_bs = static_cast<int>(rng.next_below(3));
        for (int d = 0; d < dim; ++d)
            c.bins.push_back(-60 - static_cast<int>(rng.next_below(60)));
        q.update(c, 0, rng.uniform(-100.0, -50.0));
        stored.push_back(c);
    }
    for (int trial = 0; trial < 1000; ++trial) {
        Context probe;
        probe.serving_bs = static_cast<int>(rng.next_below(3));
        for (int d = 0; d < dim; ++d) probe.access_rsrp.push_back(rng.uniform(-120.0, -60.0));
        QuantizedContext qp = quantize(probe, q.bin_width_db);

        // independent scan: same-serving partition first, lexicographic tie-break
        const QuantizedContext* best = nullptr;
        long best_d2 = 0;
        for (const auto& [c, actions] : q.entries()) {
            if (c.serving_bs != qp.serving_bs) continue;
            long d2 = 0;
            for (int d = 0; d < dim; ++d) {
                long diff = c.bins[static_cast<std::size_t>(d)] - qp.bins[static_cast<std::size_t>(d)];
                d2 += diff * diff;
            }
            if (!best || d2 < best_d2 || (d2 == best_d2 && c < *best)) {
                best = &c;
                best_d2 = d2;
            }
        }
        REQUIRE(best);
        REQUIRE(nearest_context(q, probe) == *best);
    }
}

TEST_CASE("cmab_decide returns the argmax action") {
    QTable q;
    q.update(ctx(0, {-80, -90}), 0, -70.0);
    q.update(ctx(0, {-80, -90}), 1, -60.0);
    MeasurementReport report{0, {-79.9, -89.9}};
    CHECK(cmab_decide(q, report) == 1);
}

TEST_CASE("cmab_decide tie-breaks toward the serving BS") {
    QTable q;
    q.update(ctx(1, {-80, -90, -85}), 0, -70.0);
    q.update(ctx(1, {-80, -90, -85}), 1, -70.0);
    q.update(ctx(1, {-80, -90, -85}), 2, -70.0);
    MeasurementReport report{1, {-79.9, -89.9, -84.9}};
    CHECK(cmab_decide(q, report) == 1);
    // when the serving BS was never tried, the lowest id wins the tie
    MeasurementReport other{1, {-79.9, -89.9, -84.9}};
    QTable q2;
    q2.update(ctx(1, {-80, -90, -85}), 0, -70.0);
    q2.update(ctx(1, {-80, -90, -85}), 2, -70.0);
    CHECK(cmab_decide(q2, other) == 0);
}

TEST_CASE("cmab_decide excludes never-observed actions") {
    QTable q;
    q.update(ctx(0, {-80, -90}), 0, -120.0); // the only observed action, however poor
    MeasurementReport report{0, {-79.9, -89.9}};
    CHECK(cmab_decide(q, report) == 0);
}

TEST_CASE("greedy choice is invariant under a uniform reward shift") {
    Rng rng(808);
    for (int trial = 0; trial < 200; ++trial) {
        QTable a, b;
        double shift = rng.uniform(-50.0, 50.0);
        QuantizedContext c = ctx(0, {-80, -90, -70});
        for (int act = 0; act < 3; ++act) {
            double r = rng.uniform(-100.0, -50.0);
            a.update(c, act, r);
            b.update(c, act, r + shift);
        }
        MeasurementReport report{0, {-79.9, -89.9, -69.9}};
        REQUIRE(cmab_decide(a, report) == cmab_decide(b, report));
    }
}

TEST_CASE("empty table raises the untrained-agent error") {
    QTable q;
    MeasurementReport report{0, {-80.0, -90.0}};
    CHECK_THROWS_AS(cmab_decide(q, report), UntrainedAgentError);
    CHECK_THROWS_AS(nearest_context(q, Context{0, {-80.0}}), UntrainedAgentError);
}

TEST_CASE("save/load round-trips an initialized empty table") {
    QTable q;
    q.bin_width_db = 2.0;
    q.context_floor_dbm = -100.0;
    q.scenario_hash = "cafe";
    q.train_seed = 42;
    q.action_count = 3;
    auto path = temp_file("beamho_empty_qtable.json");
    save_qtable(q, path.string());
    CHECK(load_qtable(path.string()) == q);
    std::filesystem::remove(path);
}

TEST_CASE("save/load round-trips a populated table structurally") {
    Rng rng(2121);
    QTable q;
    q.scenario_hash = "beef";
    q.train_seed = 7;
    q.action_count = 4;
    for (int i = 0; i < 5000; ++i) {
        QuantizedContext c;
        c.serving_bs = static_cast<int>(rng.next_below(4));
        for (int d = 0; d < 4; ++d) c.bins.push_back(-60 - static_cast<int>(rng.next_below(50)));
        q.update(c, static_cast<int>(rng.next_below(4)), rng.uniform(-110.0, -40.0));
    }
    auto path = temp_file("beamho_big_qtable.json");
    save_qtable(q, path.string());
    QTable loaded = load_qtable(path.string());
    CHECK(loaded == q);
    std::filesystem::remove(path);
}

TEST_CASE("identical tables serialize byte-identically") {
    auto build = [] {
        QTable q;
        q.scenario_hash = "f00d";
        q.action_count = 2;
        // insertion order differs; serialized order must not
        q.update(ctx(1, {-90, -80}), 1, -61.25);
        q.update(ctx(0, {-70, -75}), 0, -55.5);
        return q;
    };
    auto build_reversed = [] {
        QTable q;
        q.scenario_hash = "f00d";
        q.action_count = 2;
        q.update(ctx(0, {-70, -75}), 0, -55.5);
        q.update(ctx(1, {-90, -80}), 1, -61.25);
        return q;
    };
    CHECK(qtable_to_json(build()).dump() == qtable_to_json(build_reversed()).dump());
}

TEST_CASE("loading a wrong schema version fails explicitly") {
    auto path = temp_file("beamho_bad_version.json");
    {
        std::ofstream out(path);
        out << R"({"schema_version": 99, "scenario_hash": "", "train_seed": 0,)"
            << R"( "bin_width_db": 1.0, "action_count": 2, "entries": []})";
    }
    CHECK_THROWS_AS(load_qtable(path.string()), QTableFormatError);
    std::filesystem::remove(path);
}

TEST_CASE("corrupt files fail with a format error") {
    auto path = temp_file("beamho_corrupt.json");
    {
        std::ofstream out(path);
        out << "{ this is not json";
    }
    CHECK_THROWS_AS(load_qtable(path.string()), QTableFormatError);
    std::filesystem::remove(path);
}

TEST_CASE("entries with zero visit counts are rejected at load") {
    auto path = temp_file("beamho_zero_count.json");
    {
        std::ofstream out(path);
        out << R"({"schema_version": 1, "scenario_hash": "", "train_seed": 0,)"
            << R"( "bin_width_db": 1.0, "action_count": 2,)"
            << R"( "entries": [{"serving": 0, "bins": [-80], "actions":)"
            << R"( [{"bs": 0, "mean": -70.0, "count": 0}]}]})";
    }
    CHECK_THROWS_AS(load_qtable(path.string()), QTableFormatError);
    std::filesystem::remove(path);
}
