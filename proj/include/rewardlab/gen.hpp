#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rewardlab/mdp.hpp"
#include "rewardlab/tensor.hpp"

namespace rewardlab {

/// Knobs of the random environment and reward generators. The defaults
/// reproduce the reference generation procedure: sparse softmax transitions
/// over Gaussian logits, Gaussian rewards passed through optional
/// sparsification, scaling, translation and potential shaping.
struct GenConfig {
    int n_states = 32;
    int n_actions = 4;
    double gamma = 0.95;

    double transition_sparsity_threshold = 1.0;
    double transition_sparsity_fill = -20.0;

    double reward_sparsify_prob = 0.2;
    double reward_sparsify_threshold = 3.0;
    double scale_prob = 0.7;
    double scale_min = 0.0, scale_max = 10.0;
    double translate_prob = 0.3;
    double translate_min = 0.0, translate_max = 10.0;
    double shaping_prob = 0.5;
    double shaping_scale_min = 0.0, shaping_scale_max = 10.0;
    double shaping_shift_min = 0.0, shaping_shift_max = 1.0;

    int interp_steps = 16;
    int pairs_per_env = 16;

    void validate() const;
};

/// One environment with its reward pairs and all interpolants;
/// pairs_per_env * interp_steps comparisons in total.
struct RewardPairBatch {
    Mdp env;
    std::vector<std::pair<RewardTable, RewardTable>> base_pairs;
    std::vector<std::vector<RewardTable>> interpolants;
};

/// Random MDP: Gaussian logits, entries under the sparsity threshold pushed
/// to the fill value, softmax over the successor axis, uniform mu0.
/// Bit-identical for equal (config, seed).
Mdp gen_mdp(const GenConfig& config, std::uint64_t seed);

/// Random reward table of shape [n_states, n_actions, n_states], transformed
/// by the four probabilistic steps in their fixed order: sparsify, scale,
/// translate, shape. Bit-identical for equal inputs.
RewardTable gen_reward(const GenConfig& config, std::uint64_t seed, int n_states,
                       int n_actions);

/// [r1 + i (r2 - r1)/steps for i = 1..steps]; the last element is r2 up to
/// floating rounding.
std::vector<RewardTable> interpolate(const RewardTable& r1, const RewardTable& r2,
                                     int steps);

/// Builds the environment, base pairs and interpolants for one environment
/// index, deriving every sub-stream from hash64({master_seed, env_index,
/// pair_index, role}).
RewardPairBatch gen_batch(const GenConfig& config, std::uint64_t master_seed,
                          int env_index);

/// Seed roles used by gen_batch's splitting rule.
enum : std::uint64_t {
    kSeedRoleEnv = 0,
    kSeedRoleRewardFirst = 1,
    kSeedRoleRewardSecond = 2,
    kSeedRoleRegret = 3,
};

} // namespace rewardlab
