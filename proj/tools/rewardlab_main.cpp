#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rewardlab/harness.hpp"
#include "rewardlab/serialize.hpp"
#include "rewardlab/validate.hpp"

namespace {

using namespace rewardlab;

constexpr int kExitOk = 0;
constexpr int kExitValidationFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t master_seed_fallback() {
    if (const char* env = std::getenv("REWARD_LAB_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw Error(ErrorCode::BadConfig,
                        "REWARD_LAB_SEED is not an integer: " + std::string(env));
        }
    }
    return 0;
}

void print_policy_line(std::ostream& out, const char* name, const Policy& pi) {
    out << name;
    for (int a : pi.det) out << " " << a;
    out << "\n";
}

GenConfig gen_config_from(const std::string& config_path) {
    if (config_path.empty()) return GenConfig{};
    return parse_config_file(config_path).gen;
}

int cmd_gen_env(const std::string& config_path, std::uint64_t seed, int states,
                int actions, double gamma, const std::string& out_path) {
    GenConfig cfg = gen_config_from(config_path);
    if (states > 0) cfg.n_states = states;
    if (actions > 0) cfg.n_actions = actions;
    if (gamma > 0.0) cfg.gamma = gamma;
    Mdp mdp = gen_mdp(cfg, seed);
    validate_mdp(mdp);
    save_mdp_json(mdp, out_path);
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
}

int cmd_gen_rewards(const std::string& config_path, const std::string& env_path,
                    std::uint64_t seed, const std::string& out_path) {
    Mdp mdp = load_mdp_json(env_path);
    GenConfig cfg = gen_config_from(config_path);
    cfg.n_states = mdp.n_states;
    cfg.n_actions = mdp.n_actions;
    cfg.gamma = mdp.gamma;
    RewardTable r = gen_reward(cfg, seed, mdp.n_states, mdp.n_actions);
    save_reward_json(r, out_path);
    std::cout << "wrote " << out_path << "\n";
    return kExitOk;
}

int cmd_distance(const std::string& env_path, const std::string& r1_path,
                 const std::string& r2_path, const std::vector<std::string>& metrics) {
    Mdp mdp = load_mdp_json(env_path);
    RewardTable r1 = load_reward_json(r1_path);
    RewardTable r2 = load_reward_json(r2_path);
    if (!mdp.shape_matches(r1) || !mdp.shape_matches(r2))
        throw Error(ErrorCode::ShapeMismatch, "reward shape does not match the environment");
    DistributionPair dists = DistributionPair::uniform(mdp.n_states, mdp.n_actions);
    for (const std::string& text : metrics) {
        MetricSpec spec = parse_metric_spec(text);
        double d = starc_distance(spec, r1, r2, mdp, dists);
        std::cout << text << "," << format_value(d) << "\n";
    }
    return kExitOk;
}

int cmd_regret(const std::string& env_path, const std::string& r1_path,
               const std::string& r2_path, const std::string& mode,
               std::uint64_t seed) {
    Mdp mdp = load_mdp_json(env_path);
    RewardTable r1 = load_reward_json(r1_path);
    RewardTable r2 = load_reward_json(r2_path);
    RegretMode m = mode == "rollout" ? RegretMode::Rollout : RegretMode::Exact;
    RegretReport rep = optimal_pair_regret(mdp, r1, r2, m, seed);
    std::cout << "regret," << format_value(rep.regret) << "\n"
              << "reg_forward," << format_value(rep.reg_forward) << "\n"
              << "reg_backward," << format_value(rep.reg_backward) << "\n";
    print_policy_line(std::cout, "pi_1", rep.pi_1);
    print_policy_line(std::cout, "pi_2", rep.pi_2);
    print_policy_line(std::cout, "pi_x", rep.pi_x);
    print_policy_line(std::cout, "pi_y", rep.pi_y);
    return kExitOk;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir,
                   bool seed_flag_set, std::uint64_t seed_flag, int parallelism_flag) {
    ExperimentFileConfig file_cfg = parse_config_file(config_path);
    ExperimentConfig cfg;
    cfg.gen = file_cfg.gen;
    cfg.n_envs = file_cfg.n_envs;
    if (!file_cfg.metric_specs.empty()) cfg.metric_specs = file_cfg.metric_specs;
    cfg.regret_mode = file_cfg.regret_mode;
    // Precedence: --seed flag, then the config file, then REWARD_LAB_SEED.
    cfg.master_seed = seed_flag_set          ? seed_flag
                      : file_cfg.master_seed_set ? file_cfg.master_seed
                                                 : master_seed_fallback();
    cfg.parallelism = parallelism_flag >= 0 ? parallelism_flag : file_cfg.parallelism;

    std::filesystem::create_directories(out_dir);
    ExperimentResult result = run_experiment(cfg);
    std::string records_path = out_dir + "/records.csv";
    std::string summary_path = out_dir + "/summary.csv";
    write_records_csv(result.records, cfg.metric_specs, records_path);
    write_summary_csv(result.summary, summary_path);
    for (const std::string& spec : cfg.metric_specs) {
        std::string svg_path = out_dir + "/scatter_" + spec + ".svg";
        emit_scatter_svg(result.records, cfg.metric_specs, spec, svg_path);
    }
    std::cout << "records: " << records_path << " (" << result.records.size()
              << " rows)\nsummary: " << summary_path << "\n";
    for (const auto& row : result.summary.rows)
        std::cout << row.spec << "," << format_value(row.correlation) << ","
                  << row.n_samples << "\n";
    return kExitOk;
}

int cmd_validate(const std::string& suite) {
    bool ok = true;
    bool ran = false;
    auto run = [&](const char* name, bool (*fn)(std::ostream&)) {
        if (!suite.empty() && suite != name) return;
        ran = true;
        std::cout << "suite " << name << ":\n";
        bool passed = fn(std::cout);
        std::cout << (passed ? "suite passed" : "suite FAILED") << ": " << name << "\n";
        ok = ok && passed;
    };
    run("pseudometric", acceptance_pseudometric);
    run("invariance", acceptance_invariance);
    run("counterexamples", acceptance_counterexamples);
    run("oracle", [](std::ostream& out) {
        bool a = acceptance_zero_distance_order(out);
        bool b = acceptance_epic_form(out);
        bool c = acceptance_regret_oracle(out);
        return a && b && c;
    });
    if (!ran) throw Error(ErrorCode::BadConfig, "unknown suite '" + suite + "'");
    return ok ? kExitOk : kExitValidationFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reward-function distance laboratory for tabular MDPs"};
    app.require_subcommand(1);

    // gen-env
    auto* gen_env = app.add_subcommand("gen-env", "Generate a random environment");
    std::uint64_t ge_seed = 0;
    int ge_states = 0, ge_actions = 0;
    double ge_gamma = 0.0;
    std::string ge_out, ge_config;
    gen_env->add_option("--seed", ge_seed, "Generator seed");
    gen_env->add_option("--states", ge_states, "Number of states");
    gen_env->add_option("--actions", ge_actions, "Number of actions");
    gen_env->add_option("--gamma", ge_gamma, "Discount factor");
    gen_env->add_option("--config", ge_config, "Generator config file (flags override)");
    gen_env->add_option("--out", ge_out, "Output JSON path")->required();

    // gen-rewards
    auto* gen_rew = app.add_subcommand("gen-rewards", "Generate a random reward table");
    std::string gr_env, gr_out, gr_config;
    std::uint64_t gr_seed = 0;
    gen_rew->add_option("--env", gr_env, "Environment JSON")->required();
    gen_rew->add_option("--seed", gr_seed, "Generator seed");
    gen_rew->add_option("--config", gr_config, "Generator config file");
    gen_rew->add_option("--out", gr_out, "Output JSON path")->required();

    // distance
    auto* dist = app.add_subcommand("distance", "Evaluate metric specs on a reward pair");
    std::string d_env, d_r1, d_r2;
    std::vector<std::string> d_metrics;
    dist->add_option("--env", d_env, "Environment JSON")->required();
    dist->add_option("--r1", d_r1, "First reward JSON")->required();
    dist->add_option("--r2", d_r2, "Second reward JSON")->required();
    dist->add_option("--metric", d_metrics, "Metric spec, e.g. VAL-2-2 (repeatable)")
        ->required();

    // regret
    auto* reg = app.add_subcommand("regret", "Regret between two rewards");
    std::string rg_env, rg_r1, rg_r2, rg_mode = "exact";
    std::uint64_t rg_seed = 0;
    reg->add_option("--env", rg_env, "Environment JSON")->required();
    reg->add_option("--r1", rg_r1, "First reward JSON")->required();
    reg->add_option("--r2", rg_r2, "Second reward JSON")->required();
    reg->add_option("--mode", rg_mode, "exact or rollout")
        ->check(CLI::IsMember({"exact", "rollout"}));
    reg->add_option("--seed", rg_seed, "Rollout seed");

    // experiment
    auto* exp = app.add_subcommand("experiment", "Run the correlation experiment");
    std::string ex_config, ex_out_dir;
    std::uint64_t ex_seed = 0;
    int ex_parallelism = -1;
    exp->add_option("--config", ex_config, "Flat key = value config file")->required();
    exp->add_option("--out-dir", ex_out_dir, "Output directory")->required();
    auto* ex_seed_opt = exp->add_option("--seed", ex_seed, "Master seed override");
    exp->add_option("--parallelism", ex_parallelism, "Worker count (0 = auto)");

    // validate
    auto* val = app.add_subcommand("validate", "Run the property suites");
    std::string v_suite;
    val->add_option("--suite", v_suite,
                    "pseudometric, invariance, counterexamples or oracle")
        ->check(CLI::IsMember({"pseudometric", "invariance", "counterexamples", "oracle"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen_env->parsed())
            return cmd_gen_env(ge_config, ge_seed, ge_states, ge_actions, ge_gamma,
                               ge_out);
        if (gen_rew->parsed()) return cmd_gen_rewards(gr_config, gr_env, gr_seed, gr_out);
        if (dist->parsed()) return cmd_distance(d_env, d_r1, d_r2, d_metrics);
        if (reg->parsed()) return cmd_regret(rg_env, rg_r1, rg_r2, rg_mode, rg_seed);
        if (exp->parsed())
            return cmd_experiment(ex_config, ex_out_dir, ex_seed_opt->count() > 0,
                                  ex_seed, ex_parallelism);
        if (val->parsed()) return cmd_validate(v_suite);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
