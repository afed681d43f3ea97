#pragma once

#include <cstdint>
#include <string>

#include "rewardlab/gen.hpp"
#include "rewardlab/mdp.hpp"
#include "rewardlab/regret.hpp"
#include "rewardlab/tensor.hpp"

namespace rewardlab {

/// Environments and rewards share one JSON document shape with keys
/// n_states, n_actions, gamma, mu0, transition [s][a][s'] and reward.
/// An environment file carries the first five; a reward file carries the
/// counts plus reward. Nesting order is row-major and normative.
void save_mdp_json(const Mdp& mdp, const std::string& path);
Mdp load_mdp_json(const std::string& path);

void save_reward_json(const RewardTable& reward, const std::string& path);
RewardTable load_reward_json(const std::string& path);

/// Persists a generated batch in the same document shape, with the rewards
/// under "pairs" and a "batch_manifest" recording the seeds that produced
/// everything.
void save_batch_json(const RewardPairBatch& batch, std::uint64_t master_seed,
                     int env_index, const std::string& path);

/// Experiment-level settings parsed from a flat `key = value` file.
struct ExperimentFileConfig {
    GenConfig gen;
    int n_envs = 8;
    std::vector<std::string> metric_specs;
    RegretMode regret_mode = RegretMode::Exact;
    std::uint64_t master_seed = 0;
    bool master_seed_set = false; // whether the file named a seed explicitly
    int parallelism = 0;
};

/// Parses `key = value` lines; '#' starts a comment, blank lines are
/// ignored, unknown keys are rejected.
ExperimentFileConfig parse_config_file(const std::string& path);
ExperimentFileConfig parse_config_text(const std::string& text);

} // namespace rewardlab
