#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "beamho/baseline.hpp"
#include "beamho/cmab.hpp"
#include "beamho/mobility.hpp"
#include "beamho/radio.hpp"
#include "beamho/rng.hpp"

namespace beamho {

inline constexpr int kScenarioSchemaVersion = 1;

// A fully resolved simulation setup: world, mobility, both policies' configs.
struct ScenarioBundle {
    std::string name;
    Deployment deployment;
    MobilityModel eval_mobility{MobilityVariant::SemiDeterministic, 1.0};
    BaselineConfig baseline;
    AgentConfig agent;
    std::uint64_t relocate_every = 10000; // training walk restart period
    std::map<std::string, Vec2> markers;  // named reference positions
    nlohmann::ordered_json notes;         // free-form parameter annotations
};

inline std::string variant_name(PropagationVariant v) {
    return v == PropagationVariant::LogDistance ? "log-distance" : "urban-macro";
}

inline PropagationVariant propagation_variant_from(const std::string& s) {
    if (s == "log-distance") return PropagationVariant::LogDistance;
    if (s == "urban-macro") return PropagationVariant::UrbanMacro;
    throw ValidationError("unknown propagation variant: " + s);
}

inline std::string mobility_variant_name(MobilityVariant v) {
    switch (v) {
        case MobilityVariant::RandomWalk: return "random-walk";
        case MobilityVariant::SemiDeterministic: return "semi-deterministic";
        case MobilityVariant::Lattice: return "lattice";
    }
    return "random-walk";
}

inline MobilityVariant mobility_variant_from(const std::string& s) {
    if (s == "random-walk") return MobilityVariant::RandomWalk;
    if (s == "semi-deterministic") return MobilityVariant::SemiDeterministic;
    if (s == "lattice") return MobilityVariant::Lattice;
    throw ValidationError("unknown mobility variant: " + s);
}

inline nlohmann::ordered_json deployment_to_json(const Deployment& dep) {
    nlohmann::ordered_json d;
    d["noise_floor_dbm"] = dep.noise_floor_dbm;
    d["bounds"] = {{"xmin", dep.bounds.xmin},
                   {"ymin", dep.bounds.ymin},
                   {"xmax", dep.bounds.xmax},
                   {"ymax", dep.bounds.ymax}};
    const auto& p = dep.propagation;
    d["propagation"] = {{"variant", variant_name(p.variant)},
                        {"exponent", p.exponent},
                        {"ref_loss_db", p.ref_loss_db},
                        {"shadowing_sigma_db", p.shadowing_sigma_db},
                        {"freq_ghz", p.freq_ghz},
                        {"shadow_grid_m", p.shadow_grid_m}};
    auto& stations = d["stations"] = nlohmann::ordered_json::array();
    for (const auto& bs : dep.stations) {
        nlohmann::ordered_json s;
        s["id"] = bs.id;
        s["position"] = {bs.position.x, bs.position.y};
        s["boresight_deg"] = bs.boresight_deg;
        s["tx_power_dbm"] = bs.tx_power_dbm;
        auto beam_json = [](const Beam& b) {
            return nlohmann::ordered_json{{"azimuth_deg", b.azimuth_deg},
                                          {"beamwidth_deg", b.beamwidth_deg},
                                          {"max_gain_dbi", b.max_gain_dbi}};
        };
        auto& ab = s["access_beams"] = nlohmann::ordered_json::array();
        for (const auto& b : bs.access_beams) ab.push_back(beam_json(b));
        auto& lb = s["link_beams"] = nlohmann::ordered_json::array();
        for (const auto& b : bs.link_beams) lb.push_back(beam_json(b));
        stations.push_back(std::move(s));
    }
    return d;
}

inline Deployment deployment_from_json(const nlohmann::ordered_json& d) {
    Deployment dep;
    dep.noise_floor_dbm = d.at("noise_floor_dbm").get<double>();
    const auto& b = d.at("bounds");
    dep.bounds = {b.at("xmin").get<double>(), b.at("ymin").get<double>(),
                  b.at("xmax").get<double>(), b.at("ymax").get<double>()};
    const auto& p = d.at("propagation");
    dep.propagation.variant = propagation_variant_from(p.at("variant").get<std::string>());
    dep.propagation.exponent = p.at("exponent").get<double>();
    dep.propagation.ref_loss_db = p.at("ref_loss_db").get<double>();
    dep.propagation.shadowing_sigma_db = p.at("shadowing_sigma_db").get<double>();
    dep.propagation.freq_ghz = p.value("freq_ghz", 3.5);
    dep.propagation.shadow_grid_m = p.value("shadow_grid_m", 5.0);
    for (const auto& s : d.at("stations")) {
        BaseStation bs;
        bs.id = s.at("id").get<int>();
        bs.position = {s.at("position").at(0).get<double>(), s.at("position").at(1).get<double>()};
        bs.boresight_deg = s.at("boresight_deg").get<double>();
        bs.tx_power_dbm = s.at("tx_power_dbm").get<double>();
        auto beam_from = [](const nlohmann::ordered_json& j, BeamKind kind) {
            return Beam{j.at("azimuth_deg").get<double>(), j.at("beamwidth_deg").get<double>(),
                        j.at("max_gain_dbi").get<double>(), kind};
        };
        for (const auto& j : s.at("access_beams")) bs.access_beams.push_back(beam_from(j, BeamKind::Access));
        for (const auto& j : s.at("link_beams")) bs.link_beams.push_back(beam_from(j, BeamKind::Link));
        dep.stations.push_back(std::move(bs));
    }
    return dep;
}

inline nlohmann::ordered_json scenario_to_json(const ScenarioBundle& sc) {
    nlohmann::ordered_json doc;
    doc["schema_version"] = kScenarioSchemaVersion;
    doc["name"] = sc.name;
    doc["deployment"] = deployment_to_json(sc.deployment);
    doc["mobility"] = {{"variant", mobility_variant_name(sc.eval_mobility.variant)},
                       {"step_m", sc.eval_mobility.step_m}};
    doc["baseline"] = {{"hysteresis_db", sc.baseline.hysteresis_db},
                       {"ttt_steps", sc.baseline.ttt_steps}};
    doc["agent"] = {{"epsilon", sc.agent.epsilon},
                    {"bin_width_db", sc.agent.bin_width_db},
                    {"max_steps", sc.agent.max_steps},
                    {"context_floor_dbm", sc.agent.context_floor_dbm},
                    {"anchored_eval", sc.agent.anchored_eval}};
    doc["train"] = {{"relocate_every", sc.relocate_every}};
    if (!sc.markers.empty()) {
        auto& m = doc["markers"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : sc.markers) m[k] = {v.x, v.y};
    }
    if (!sc.notes.is_null()) doc["notes"] = sc.notes;
    return doc;
}

inline ScenarioBundle scenario_from_json(const nlohmann::ordered_json& doc) {
    if (!doc.is_object() || !doc.contains("schema_version"))
        throw ValidationError("not a scenario document");
    int version = doc.at("schema_version").get<int>();
    if (version != kScenarioSchemaVersion)
        throw ValidationError("unsupported scenario schema_version " + std::to_string(version));
    ScenarioBundle sc;
    sc.name = doc.at("name").get<std::string>();
    sc.deployment = deployment_from_json(doc.at("deployment"));
    const auto& m = doc.at("mobility");
    sc.eval_mobility.variant = mobility_variant_from(m.at("variant").get<std::string>());
    sc.eval_mobility.step_m = m.at("step_m").get<double>();
    const auto& b = doc.at("baseline");
    sc.baseline = {b.at("hysteresis_db").get<double>(), b.at("ttt_steps").get<int>()};
    const auto& a = doc.at("agent");
    sc.agent.epsilon = a.at("epsilon").get<double>();
    sc.agent.bin_width_db = a.at("bin_width_db").get<double>();
    sc.agent.max_steps = a.at("max_steps").get<std::uint64_t>();
    sc.agent.context_floor_dbm = a.value("context_floor_dbm", -140.0);
    sc.agent.anchored_eval = a.value("anchored_eval", false);
    if (doc.contains("train")) sc.relocate_every = doc.at("train").value("relocate_every", 10000ULL);
    if (doc.contains("markers"))
        for (const auto& [k, v] : doc.at("markers").items())
            sc.markers[k] = {v.at(0).get<double>(), v.at(1).get<double>()};
    if (doc.contains("notes")) sc.notes = doc.at("notes");
    return sc;
}

// Hash over the resolved deployment document, including the derived shadowing
// seed. Identifies the exact radio world a Q-table was trained in.
inline std::string scenario_hash(const Deployment& dep) {
    auto doc = deployment_to_json(dep);
    std::uint64_t h = fnv1a(doc.dump());
    h = hash_combine(h, dep.propagation.shadow_seed);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

// Bind the per-scenario shadowing field to a master seed.
inline void apply_master_seed(ScenarioBundle& sc, std::uint64_t master_seed) {
    sc.deployment.propagation.shadow_seed = substream_seed(master_seed, "shadowing");
}

// ---- built-in scenarios -------------------------------------------------

namespace detail {

inline std::vector<Vec2> hex_sites(double isd) {
    std::vector<Vec2> sites{{0.0, 0.0}};
    for (int k = 0; k < 6; ++k) {
        double a = k * 60.0 * M_PI / 180.0;
        sites.push_back({isd * std::cos(a), isd * std::sin(a)});
    }
    return sites;
}

inline std::vector<Beam> ring_beams(double start_deg, double spacing_deg, int count,
                                    double bw, double gain, BeamKind kind) {
    std::vector<Beam> beams;
    for (int j = 0; j < count; ++j) {
        double az = std::fmod(start_deg + j * spacing_deg, 360.0);
        if (az < 0.0) az += 360.0;
        beams.push_back({az, bw, gain, kind});
    }
    return beams;
}

inline ScenarioBundle make_hex7(const std::string& name, double link_bw_deg) {
    ScenarioBundle sc;
    sc.name = name;
    sc.deployment.noise_floor_dbm = -140.0;
    sc.deployment.bounds = {-800.0, -800.0, 800.0, 800.0};
    sc.deployment.propagation = {PropagationVariant::LogDistance, 3.1, 40.0, 0.0, 3.5, 5.0, 0};
    int id = 0;
    for (Vec2 site : hex_sites(500.0)) {
        BaseStation bs;
        bs.id = id++;
        bs.position = site;
        bs.boresight_deg = 90.0;
        bs.tx_power_dbm = 30.0;
        bs.access_beams = ring_beams(90.0, 120.0, 3, 65.0, 8.0, BeamKind::Access);
        bs.link_beams = ring_beams(22.5, 45.0, 8, link_bw_deg, 24.0, BeamKind::Link);
        sc.deployment.stations.push_back(std::move(bs));
    }
    sc.agent.bin_width_db = 2.0;
    sc.agent.max_steps = 4000000;
    sc.notes = {"7 BS hexagonal, ISD 500 m, bounds 1600x1600 m",
                "3 access beams 8 dBi/65deg, 8 link beams 24 dBi per BS",
                "log-distance path loss, exponent 3.1, ref loss 40 dB, tx 30 dBm",
                "2 dB context bins, 4M training steps"};
    return sc;
}

}  // namespace detail

inline ScenarioBundle make_env1() { return detail::make_hex7("env1", 10.0); }

// env2 differs from env1 only in link beamwidth: narrower beams that reach
// deeper into neighbor cells.
inline ScenarioBundle make_env2() { return detail::make_hex7("env2", 5.0); }

inline ScenarioBundle make_env3() {
    ScenarioBundle sc;
    sc.name = "env3";
    sc.deployment.noise_floor_dbm = -140.0;
    // UEs roam the core of the 7-site cluster; a tighter area keeps the
    // shadowed 21-station context space trainable within the step budget.
    sc.deployment.bounds = {-300.0, -300.0, 300.0, 300.0};
    sc.deployment.propagation = {PropagationVariant::UrbanMacro, 3.1, 40.0, 6.0, 3.5, 5.0, 0};
    int id = 0;
    for (Vec2 site : detail::hex_sites(500.0)) {
        for (int sector = 0; sector < 3; ++sector) {
            double bore = sector * 120.0;
            BaseStation bs;
            bs.id = id++;
            bs.position = site;
            bs.boresight_deg = bore;
            bs.tx_power_dbm = 30.0;
            bs.access_beams = {Beam{bore, 65.0, 8.0, BeamKind::Access}};
            for (int j = 0; j < 8; ++j) {
                double az = std::fmod(bore - 52.5 + j * 15.0 + 360.0, 360.0);
                bs.link_beams.push_back({az, 10.0, 24.0, BeamKind::Link});
            }
            sc.deployment.stations.push_back(std::move(bs));
        }
    }
    sc.agent.bin_width_db = 4.0;
    sc.agent.context_floor_dbm = -100.0; // stations below reporting range collapse
    sc.agent.max_steps = 8000000;
    // 21 stations x shadowed contexts leave the table sparse; evaluate
    // conservatively instead of trusting distant matches.
    sc.agent.anchored_eval = true;
    sc.notes = {"7 sites x 3 sectors = 21 BS, ISD 500 m, boresights 0/120/240",
                "1 access beam + 8 link beams (fan +-52.5 deg) per sector",
                "urban-macro propagation, carrier 3.5 GHz, shadowing 6 dB / 5 m grid",
                "roaming area 600x600 m", "4 dB bins, -100 dBm report floor",
                "8M training steps, anchored eval"};
    return sc;
}

// Two-BS discriminating fixture: at marker x2 the serving-side access beam of
// BS 1 is strongest, while BS 0 has the only link beam aimed at x2.
inline ScenarioBundle make_fig4() {
    ScenarioBundle sc;
    sc.name = "fig4";
    sc.deployment.noise_floor_dbm = -140.0;
    sc.deployment.bounds = {-100.0, -250.0, 600.0, 250.0};
    sc.deployment.propagation = {PropagationVariant::LogDistance, 3.1, 40.0, 0.0, 3.5, 5.0, 0};

    BaseStation bs0;
    bs0.id = 0;
    bs0.position = {0.0, 0.0};
    bs0.boresight_deg = 0.0;
    bs0.tx_power_dbm = 30.0;
    bs0.access_beams = {Beam{0.0, 65.0, 8.0, BeamKind::Access}};
    bs0.link_beams = {Beam{0.0, 10.0, 24.0, BeamKind::Link},
                      Beam{45.0, 10.0, 24.0, BeamKind::Link},
                      Beam{315.0, 10.0, 24.0, BeamKind::Link},
                      Beam{90.0, 10.0, 24.0, BeamKind::Link}};

    BaseStation bs1;
    bs1.id = 1;
    bs1.position = {500.0, 0.0};
    bs1.boresight_deg = 180.0;
    bs1.tx_power_dbm = 30.0;
    bs1.access_beams = {Beam{180.0, 65.0, 8.0, BeamKind::Access}};
    bs1.link_beams = {Beam{90.0, 10.0, 24.0, BeamKind::Link},
                      Beam{120.0, 10.0, 24.0, BeamKind::Link},
                      Beam{240.0, 10.0, 24.0, BeamKind::Link},
                      Beam{270.0, 10.0, 24.0, BeamKind::Link}};

    sc.deployment.stations = {std::move(bs0), std::move(bs1)};
    sc.markers["x1"] = {100.0, 0.0};
    sc.markers["x2"] = {350.0, 0.0};
    sc.notes = {"2 BS, 1 access beam and 4 link beams each",
                "geometry chosen so that at x2 the access argmax and the "
                "best-link argmax disagree"};
    return sc;
}

// Structural validation plus fixture-specific assertions.
inline void validate_scenario(const ScenarioBundle& sc) {
    validate_deployment(sc.deployment);
    if (sc.eval_mobility.step_m <= 0.0) throw ValidationError("mobility step_m must be > 0");
    if (sc.baseline.hysteresis_db < 0.0) throw ValidationError("hysteresis_db must be >= 0");
    if (sc.baseline.ttt_steps < 0) throw ValidationError("ttt_steps must be >= 0");
    if (sc.agent.epsilon < 0.0 || sc.agent.epsilon > 1.0)
        throw ValidationError("epsilon must lie in [0, 1]");
    if (sc.agent.bin_width_db <= 0.0) throw ValidationError("bin_width_db must be > 0");
    auto it = sc.markers.find("x2");
    if (it != sc.markers.end() && sc.deployment.stations.size() == 2) {
        Vec2 x2 = it->second;
        const auto& dep = sc.deployment;
        bool access_favors_1 = best_access_rsrp(dep, 1, x2) > best_access_rsrp(dep, 0, x2);
        bool link_favors_0 = best_link_rsrp(dep, 0, x2) > best_link_rsrp(dep, 1, x2);
        if (!access_favors_1 || !link_favors_0)
            throw ValidationError("fixture marker x2 does not realize the discriminating geometry");
    }
}

inline bool is_builtin_scenario(const std::string& name) {
    return name == "env1" || name == "env2" || name == "env3" || name == "fig4";
}

// Accepts a built-in name or a path to a scenario JSON file.
inline ScenarioBundle load_scenario(const std::string& name_or_path) {
    ScenarioBundle sc;
    if (name_or_path == "env1") sc = make_env1();
    else if (name_or_path == "env2") sc = make_env2();
    else if (name_or_path == "env3") sc = make_env3();
    else if (name_or_path == "fig4") sc = make_fig4();
    else {
        std::ifstream in(name_or_path, std::ios::binary);
        if (!in)
            throw std::runtime_error("unknown scenario name and no such file: " + name_or_path);
        nlohmann::ordered_json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError("corrupt scenario file " + name_or_path + ": " + e.what());
        }
        sc = scenario_from_json(doc);
    }
    validate_scenario(sc);
    return sc;
}

}  // namespace beamho
