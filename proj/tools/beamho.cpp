#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "beamho/harness.hpp"
#include "beamho/scenario.hpp"

namespace fs = std::filesystem;
using namespace beamho;

namespace {

constexpr const char* kToolVersion = "0.1.0";

// exit codes: 0 ok, 2 validation/usage, 3 I/O
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

int log_level() {
    const char* env = std::getenv("BEAMHO_LOG");
    if (!env) return 1;
    std::string v = env;
    if (v == "quiet" || v == "0") return 0;
    if (v == "debug" || v == "2") return 2;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "beamho: " << msg << "\n";
}

std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_text_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << content;
    if (!out) throw IoError("write failed: " + path.string());
}

// Written before any long computation; records everything needed to
// reproduce the run byte-identically.
void write_manifest(const fs::path& path, const std::string& command,
                    const ScenarioBundle& sc, std::uint64_t seed,
                    const nlohmann::ordered_json& params,
                    const std::vector<std::string>& artifacts) {
    nlohmann::ordered_json doc;
    doc["tool_version"] = kToolVersion;
    doc["command"] = command;
    doc["master_seed"] = seed;
    doc["params"] = params;
    doc["artifacts"] = artifacts;
    doc["scenario"] = scenario_to_json(sc);
    doc["scenario_hash"] = scenario_hash(sc.deployment);
    doc["started_at"] = iso_timestamp();
    write_text_file(path, doc.dump(1) + "\n");
}

QTable load_checked_qtable(const std::string& path, const Deployment& dep, bool strict) {
    QTable table = load_qtable(path);
    std::string expected = scenario_hash(dep);
    if (table.scenario_hash != expected) {
        std::string msg = "Q-table scenario hash " + table.scenario_hash +
                          " does not match the resolved scenario (" + expected + ")";
        if (strict) throw ValidationError(msg);
        std::cerr << "beamho: warning: " << msg << "\n";
    }
    return table;
}

int cmd_validate(const std::string& scenario_arg, std::uint64_t seed,
                 const std::string& emit_path) {
    ScenarioBundle sc = load_scenario(scenario_arg);
    apply_master_seed(sc, seed);
    std::string doc = scenario_to_json(sc).dump(1) + "\n";
    if (emit_path.empty())
        std::cout << doc;
    else
        write_text_file(emit_path, doc);
    log_info("scenario '" + sc.name + "' valid, hash " + scenario_hash(sc.deployment));
    return 0;
}

int cmd_train(const std::string& scenario_arg, std::uint64_t steps, double epsilon,
              double bin_width, std::uint64_t seed, const std::string& out_path,
              std::uint64_t relocate_every) {
    if (epsilon > 1.0) throw ValidationError("--epsilon must lie in [0, 1]");
    if (bin_width < 0.0) throw ValidationError("--bin-width must be > 0");
    ScenarioBundle sc = load_scenario(scenario_arg);
    apply_master_seed(sc, seed);

    AgentConfig cfg = sc.agent;
    if (epsilon >= 0.0) cfg.epsilon = epsilon;         // negative keeps the scenario default
    if (bin_width > 0.0) cfg.bin_width_db = bin_width; // 0 keeps the scenario default
    if (steps == 0) steps = cfg.max_steps;

    write_manifest(fs::path(out_path).string() + ".manifest.json", "train", sc, seed,
                   {{"steps", steps},
                    {"epsilon", cfg.epsilon},
                    {"bin_width_db", cfg.bin_width_db},
                    {"relocate_every", relocate_every}},
                   {out_path});

    log_info("training " + std::to_string(steps) + " steps on '" + sc.name + "'");
    MobilityModel walk{MobilityVariant::RandomWalk, sc.eval_mobility.step_m};
    QTable table = train(sc.deployment, cfg, walk, seed, steps, relocate_every);
    table.scenario_hash = scenario_hash(sc.deployment);
    save_qtable(table, out_path);

    std::printf("contexts: %zu\n", table.size());
    std::printf("visits: %lld\n", static_cast<long long>(table.total_visits()));
    std::printf("actions_per_context: %.6g\n",
                table.size() ? static_cast<double>(table.total_visits()) /
                                   static_cast<double>(table.size())
                             : 0.0);
    std::printf("qtable: %s\n", out_path.c_str());
    return 0;
}

int cmd_eval(const std::string& scenario_arg, const std::string& policy_name,
             const std::string& qtable_path, int episodes, std::int64_t steps,
             std::uint64_t seed, const std::string& out_dir, bool trace, bool strict) {
    if (policy_name != "baseline" && policy_name != "cmab")
        throw ValidationError("--policy must be baseline or cmab");
    if (policy_name == "cmab" && qtable_path.empty())
        throw ValidationError("--policy cmab requires --qtable");
    if (episodes < 1) throw ValidationError("--episodes must be >= 1");

    ScenarioBundle sc = load_scenario(scenario_arg);
    apply_master_seed(sc, seed);
    fs::create_directories(out_dir);
    write_manifest(fs::path(out_dir) / "manifest.json", "eval", sc, seed,
                   {{"policy", policy_name},
                    {"qtable", qtable_path},
                    {"episodes", episodes},
                    {"steps", steps},
                    {"trace", trace}},
                   {(fs::path(out_dir) / "episodes.csv").string(),
                    (fs::path(out_dir) / "histogram.csv").string()});

    QTable table;
    if (policy_name == "cmab") table = load_checked_qtable(qtable_path, sc.deployment, strict);

    HistogramConfig hist;
    hist.lo_dbm = sc.deployment.noise_floor_dbm;
    std::vector<EpisodeMetrics> metrics;
    std::ostringstream trace_out;
    if (trace) write_trace_header(trace_out);
    for (int i = 0; i < episodes; ++i) {
        std::uint64_t ep_seed = substream_seed(seed, "eval-walk", static_cast<std::uint64_t>(i));
        std::unique_ptr<Policy> policy;
        if (policy_name == "baseline")
            policy = std::make_unique<BaselinePolicy>(sc.baseline);
        else
            policy = std::make_unique<CmabPolicy>(table, sc.agent.anchored_eval);
        metrics.push_back(run_episode(sc.deployment, *policy, sc.eval_mobility, ep_seed,
                                      steps, i, hist, trace ? &trace_out : nullptr));
    }

    std::ostringstream ep_csv, hist_csv;
    write_episode_csv(metrics, ep_csv);
    write_histogram_csv(metrics, hist, hist_csv);
    write_text_file(fs::path(out_dir) / "episodes.csv", ep_csv.str());
    write_text_file(fs::path(out_dir) / "histogram.csv", hist_csv.str());
    if (trace) write_text_file(fs::path(out_dir) / "trace.csv", trace_out.str());

    double mean = 0.0;
    for (const auto& m : metrics) mean += m.mean_link_rsrp_dbm;
    mean /= static_cast<double>(metrics.size());
    std::printf("policy: %s\n", policy_name.c_str());
    std::printf("episodes: %d\n", episodes);
    std::printf("mean_pl_dbm: %.6g\n", mean);
    return 0;
}

int cmd_compare(const std::string& scenario_arg, const std::string& qtable_path,
                int episodes, std::int64_t steps, std::uint64_t seed,
                const std::string& out_dir, int jobs, bool strict) {
    if (qtable_path.empty()) throw ValidationError("compare requires --qtable");
    if (episodes < 1) throw ValidationError("--episodes must be >= 1");
    ScenarioBundle sc = load_scenario(scenario_arg);
    apply_master_seed(sc, seed);
    fs::create_directories(out_dir);
    write_manifest(fs::path(out_dir) / "manifest.json", "compare", sc, seed,
                   {{"qtable", qtable_path},
                    {"episodes", episodes},
                    {"steps", steps},
                    {"jobs", jobs}},
                   {(fs::path(out_dir) / "gain.csv").string(),
                    (fs::path(out_dir) / "episodes.csv").string(),
                    (fs::path(out_dir) / "histogram.csv").string()});

    QTable table = load_checked_qtable(qtable_path, sc.deployment, strict);

    HistogramConfig hist;
    hist.lo_dbm = sc.deployment.noise_floor_dbm;
    auto result = compare(sc.deployment, table, episodes, seed, sc.eval_mobility,
                          sc.baseline, steps, hist, jobs, sc.agent.anchored_eval);

    std::ostringstream gain_csv, ep_csv, hist_csv;
    write_gain_csv(result, gain_csv);
    std::vector<EpisodeMetrics> all = result.baseline;
    all.insert(all.end(), result.cmab.begin(), result.cmab.end());
    write_episode_csv(all, ep_csv);
    write_histogram_csv(result.baseline, hist, hist_csv, true);
    write_histogram_csv(result.cmab, hist, hist_csv, false);
    write_text_file(fs::path(out_dir) / "gain.csv", gain_csv.str());
    write_text_file(fs::path(out_dir) / "episodes.csv", ep_csv.str());
    write_text_file(fs::path(out_dir) / "histogram.csv", hist_csv.str());

    std::printf("episodes: %d\n", episodes);
    std::printf("mean_gain_db: %.6g\n", result.mean_gain());
    std::printf("min_gain_db: %.6g\n", result.min_gain());
    std::printf("max_gain_db: %.6g\n", result.max_gain());
    return 0;
}

int cmd_show_qtable(const std::string& qtable_path, int limit) {
    QTable table = load_qtable(qtable_path);
    std::printf("schema_version: %d\n", kQTableSchemaVersion);
    std::printf("scenario_hash: %s\n", table.scenario_hash.c_str());
    std::printf("train_seed: %llu\n", static_cast<unsigned long long>(table.train_seed));
    std::printf("bin_width_db: %.6g\n", table.bin_width_db);
    std::printf("action_count: %d\n", table.action_count);
    std::printf("contexts: %zu\n", table.size());
    std::printf("visits: %lld\n", static_cast<long long>(table.total_visits()));
    int shown = 0;
    for (const auto& [ctx, actions] : table.entries()) {
        if (shown++ >= limit) break;
        std::string bins;
        for (int b : ctx.bins) bins += (bins.empty() ? "" : " ") + std::to_string(b);
        std::printf("  serving=%d bins=[%s]", ctx.serving_bs, bins.c_str());
        for (const auto& a : actions)
            std::printf(" a%d:%.6g(%lld)", a.bs, a.mean_reward,
                        static_cast<long long>(a.visit_count));
        std::printf("\n");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"5G access/link-beam handover simulator: 3GPP baseline vs CMAB agent"};
    app.require_subcommand(1);

    std::string scenario, qtable, out_path, out_dir, policy = "baseline", emit;
    std::uint64_t seed = 1, steps_train = 0, relocate_every = 10000;
    std::int64_t steps_eval = 10000;
    double epsilon = -1.0, bin_width = 0.0;
    int episodes = 10, jobs = 1, limit = 10;
    bool trace = false, strict = false;

    auto* validate = app.add_subcommand("validate-scenario", "validate and echo a resolved scenario");
    validate->add_option("--scenario", scenario, "built-in name or scenario file")->required();
    validate->add_option("--seed", seed, "master seed (binds the shadowing field)");
    validate->add_option("--emit", emit, "write the resolved scenario here instead of stdout");

    auto* train_cmd = app.add_subcommand("train", "build a Q-table by epsilon-greedy exploration");
    train_cmd->add_option("--scenario", scenario)->required();
    train_cmd->add_option("--steps", steps_train, "training steps (0 = scenario default)");
    train_cmd->add_option("--epsilon", epsilon,
                          "exploration probability (negative = scenario default)");
    train_cmd->add_option("--bin-width", bin_width,
                          "context quantization step in dB (0 = scenario default)");
    train_cmd->add_option("--seed", seed, "master seed");
    train_cmd->add_option("--relocate-every", relocate_every,
                          "restart the training walk every N steps (0 = never)");
    train_cmd->add_option("--out", out_path, "output Q-table path")->required();

    auto* eval_cmd = app.add_subcommand("eval", "run evaluation episodes under one policy");
    eval_cmd->add_option("--scenario", scenario)->required();
    eval_cmd->add_option("--policy", policy, "baseline | cmab");
    eval_cmd->add_option("--qtable", qtable, "trained Q-table (cmab only)");
    eval_cmd->add_option("--episodes", episodes);
    eval_cmd->add_option("--steps", steps_eval, "steps per episode");
    eval_cmd->add_option("--seed", seed, "master seed");
    eval_cmd->add_option("--out-dir", out_dir)->required();
    eval_cmd->add_flag("--trace", trace, "also write a per-step trace CSV");
    eval_cmd->add_flag("--strict", strict, "scenario-hash mismatch is fatal");

    auto* compare_cmd = app.add_subcommand("compare", "paired baseline-vs-cmab gain evaluation");
    compare_cmd->add_option("--scenario", scenario)->required();
    compare_cmd->add_option("--qtable", qtable)->required();
    compare_cmd->add_option("--episodes", episodes);
    compare_cmd->add_option("--steps", steps_eval, "steps per episode");
    compare_cmd->add_option("--seed", seed, "master seed");
    compare_cmd->add_option("--out-dir", out_dir)->required();
    compare_cmd->add_option("--jobs", jobs, "parallel episode workers");
    compare_cmd->add_flag("--strict", strict, "scenario-hash mismatch is fatal");

    auto* show_cmd = app.add_subcommand("show-qtable", "print Q-table metadata and head entries");
    show_cmd->add_option("--qtable", qtable)->required();
    show_cmd->add_option("--limit", limit, "entries to print");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(scenario, seed, emit);
        if (train_cmd->parsed())
            return cmd_train(scenario, steps_train, epsilon, bin_width, seed, out_path,
                             relocate_every);
        if (eval_cmd->parsed())
            return cmd_eval(scenario, policy, qtable, episodes, steps_eval, seed, out_dir,
                            trace, strict);
        if (compare_cmd->parsed())
            return cmd_compare(scenario, qtable, episodes, steps_eval, seed, out_dir, jobs,
                               strict);
        if (show_cmd->parsed()) return cmd_show_qtable(qtable, limit);
    } catch (const ValidationError& e) {
        std::cerr << "beamho: validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const UntrainedAgentError& e) {
        std::cerr << "beamho: " << e.what() << "\n";
        return kExitValidation;
    } catch (const QTableFormatError& e) {
        std::cerr << "beamho: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "beamho: error: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}
