#include <doctest.h>

#include "beamho/scenario.hpp"

using namespace beamho;

TEST_CASE("env3 has 21 stations with 1 access and 8 link beams each") {
    ScenarioBundle sc = load_scenario("env3");
    REQUIRE(sc.deployment.stations.size() == 21);
    for (const auto& bs : sc.deployment.stations) {
        CHECK(bs.access_beams.size() == 1);
        CHECK(bs.link_beams.size() == 8);
    }
    CHECK(sc.deployment.propagation.variant == PropagationVariant::UrbanMacro);
    CHECK(sc.deployment.propagation.shadowing_sigma_db == 6.0);
}

TEST_CASE("env1 and env2 have 7 stations with 3 access and 8 link beams each") {
    for (const char* name : {"env1", "env2"}) {
        ScenarioBundle sc = load_scenario(name);
        REQUIRE(sc.deployment.stations.size() == 7);
        for (const auto& bs : sc.deployment.stations) {
            CHECK(bs.access_beams.size() == 3);
            CHECK(bs.link_beams.size() == 8);
        }
        CHECK(sc.deployment.propagation.variant == PropagationVariant::LogDistance);
        CHECK(sc.deployment.propagation.exponent == 3.1);
    }
}

TEST_CASE("env2 differs from env1 only in a narrower link beamwidth") {
    auto env1 = make_env1();
    auto env2 = make_env2();
    double bw1 = env1.deployment.stations[0].link_beams[0].beamwidth_deg;
    double bw2 = env2.deployment.stations[0].link_beams[0].beamwidth_deg;
    CHECK(bw2 < bw1);
    // normalize the intended differences away, everything else must match
    auto j1 = scenario_to_json(env1);
    auto j2 = scenario_to_json(env2);
    j2["name"] = j1["name"];
    for (auto& s : j2["deployment"]["stations"])
        for (auto& b : s["link_beams"]) b["beamwidth_deg"] = bw1;
    CHECK(j1 == j2);
}

TEST_CASE("fig4 has 2 stations with 1 access and 4 link beams each") {
    ScenarioBundle sc = load_scenario("fig4");
    REQUIRE(sc.deployment.stations.size() == 2);
    for (const auto& bs : sc.deployment.stations) {
        CHECK(bs.access_beams.size() == 1);
        CHECK(bs.link_beams.size() == 4);
    }
    CHECK(sc.markers.count("x2") == 1);
}

TEST_CASE("loading twice yields identical resolved documents") {
    for (const char* name : {"env1", "env2", "env3", "fig4"}) {
        auto a = scenario_to_json(load_scenario(name));
        auto b = scenario_to_json(load_scenario(name));
        REQUIRE(a.dump() == b.dump());
    }
}

TEST_CASE("scenario JSON round-trips through serialization") {
    for (const char* name : {"env1", "env3", "fig4"}) {
        ScenarioBundle sc = load_scenario(name);
        auto doc = scenario_to_json(sc);
        ScenarioBundle back = scenario_from_json(doc);
        CHECK(scenario_to_json(back).dump() == doc.dump());
    }
}

TEST_CASE("builtin scenarios pass validation") {
    for (const char* name : {"env1", "env2", "env3", "fig4"})
        CHECK_NOTHROW(validate_scenario(load_scenario(name)));
}

TEST_CASE("validation rejects out-of-range agent and baseline parameters") {
    ScenarioBundle sc = make_fig4();
    sc.agent.epsilon = 1.5;
    CHECK_THROWS_AS(validate_scenario(sc), ValidationError);

    sc = make_fig4();
    sc.baseline.hysteresis_db = -1.0;
    CHECK_THROWS_AS(validate_scenario(sc), ValidationError);

    sc = make_fig4();
    sc.agent.bin_width_db = 0.0;
    CHECK_THROWS_AS(validate_scenario(sc), ValidationError);
}

TEST_CASE("a broken fig4 marker is caught at load") {
    ScenarioBundle sc = make_fig4();
    sc.markers["x2"] = {10.0, 0.0}; // right next to BS 0: both argmaxes agree
    CHECK_THROWS_AS(validate_scenario(sc), ValidationError);
}

TEST_CASE("unknown scenario names are rejected") {
    CHECK_THROWS(load_scenario("env99"));
}

TEST_CASE("scenario hash changes with geometry and shadow seed") {
    ScenarioBundle a = make_env3();
    ScenarioBundle b = make_env3();
    apply_master_seed(a, 1);
    apply_master_seed(b, 1);
    CHECK(scenario_hash(a.deployment) == scenario_hash(b.deployment));
    apply_master_seed(b, 2);
    CHECK(scenario_hash(a.deployment) != scenario_hash(b.deployment));
    b = make_env3();
    apply_master_seed(b, 1);
    b.deployment.stations[0].tx_power_dbm = 31.0;
    CHECK(scenario_hash(a.deployment) != scenario_hash(b.deployment));
}
