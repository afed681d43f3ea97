#include "rewardlab/gen.hpp"

#include <cmath>
#include <string>

#include "rewardlab/errors.hpp"

namespace rewardlab {

namespace {

void check_prob(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorCode::BadConfig, std::string(name) + " must be in [0,1]");
}

void check_range(double lo, double hi, const char* name) {
    if (!(lo <= hi))
        throw Error(ErrorCode::BadConfig, std::string(name) + " range is inverted");
}

/// "With an X% probability": draw u ~ U[0,1) and act when u > 1 - X/100.
bool gate(Rng& rng, double prob) { return rng.uniform() > 1.0 - prob; }

} // namespace

void GenConfig::validate() const {
    if (n_states <= 0 || n_actions <= 0 || interp_steps <= 0 || pairs_per_env <= 0)
        throw Error(ErrorCode::BadConfig, "counts must be positive");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw Error(ErrorCode::BadConfig, "gamma must be in (0,1)");
    check_prob(reward_sparsify_prob, "reward_sparsify_prob");
    check_prob(scale_prob, "scale_prob");
    check_prob(translate_prob, "translate_prob");
    check_prob(shaping_prob, "shaping_prob");
    check_range(scale_min, scale_max, "scale");
    check_range(translate_min, translate_max, "translate");
    check_range(shaping_scale_min, shaping_scale_max, "shaping_scale");
    check_range(shaping_shift_min, shaping_shift_max, "shaping_shift");
}

Mdp gen_mdp(const GenConfig& config, std::uint64_t seed) {
    config.validate();
    const int S = config.n_states, A = config.n_actions;
    Rng rng(seed);

    Tensor3 logits(S, A, S);
    for (double& v : logits.data) v = rng.gaussian();
    for (double& v : logits.data)
        if (v < config.transition_sparsity_threshold)
            v = config.transition_sparsity_fill;

    Mdp mdp;
    mdp.n_states = S;
    mdp.n_actions = A;
    mdp.gamma = config.gamma;
    mdp.transition = Tensor3(S, A, S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const double* in = logits.row(s, a);
            double* out = mdp.transition.row(s, a);
            double max_logit = in[0];
            for (int s2 = 1; s2 < S; ++s2) max_logit = std::max(max_logit, in[s2]);
            double total = 0.0;
            for (int s2 = 0; s2 < S; ++s2) {
                out[s2] = std::exp(in[s2] - max_logit);
                total += out[s2];
            }
            for (int s2 = 0; s2 < S; ++s2) out[s2] /= total;
        }
    mdp.mu0.assign(S, 1.0 / S);
    return mdp;
}

RewardTable gen_reward(const GenConfig& config, std::uint64_t seed, int n_states,
                       int n_actions) {
    config.validate();
    Rng rng(seed);
    RewardTable r(n_states, n_actions, n_states);
    for (double& v : r.data) v = rng.gaussian();

    if (gate(rng, config.reward_sparsify_prob)) {
        for (double& v : r.data)
            if (v < config.reward_sparsify_threshold) v = 0.0;
    }
    if (gate(rng, config.scale_prob)) {
        double k = rng.uniform(config.scale_min, config.scale_max);
        for (double& v : r.data) v *= k;
    }
    if (gate(rng, config.translate_prob)) {
        double k = rng.uniform(config.translate_min, config.translate_max);
        for (double& v : r.data) v += k;
    }
    if (gate(rng, config.shaping_prob)) {
        std::vector<double> phi(n_states);
        for (double& p : phi) p = rng.gaussian();
        double scale = rng.uniform(config.shaping_scale_min, config.shaping_scale_max);
        double shift = rng.uniform(config.shaping_shift_min, config.shaping_shift_max);
        for (double& p : phi) p = p * scale + shift;
        for (int s = 0; s < n_states; ++s)
            for (int a = 0; a < n_actions; ++a) {
                double* row = r.row(s, a);
                for (int s2 = 0; s2 < n_states; ++s2)
                    row[s2] += config.gamma * phi[s2] - phi[s];
            }
    }
    return r;
}

std::vector<RewardTable> interpolate(const RewardTable& r1, const RewardTable& r2,
                                     int steps) {
    require_same_shape(r1, r2, "interpolate");
    if (steps <= 0) throw Error(ErrorCode::BadConfig, "steps must be positive");
    RewardTable delta = r2 - r1;
    delta *= 1.0 / steps;
    std::vector<RewardTable> out;
    out.reserve(steps);
    for (int i = 1; i <= steps; ++i) {
        RewardTable r = delta;
        r *= static_cast<double>(i);
        r += r1;
        out.push_back(std::move(r));
    }
    return out;
}

RewardPairBatch gen_batch(const GenConfig& config, std::uint64_t master_seed,
                          int env_index) {
    config.validate();
    RewardPairBatch batch;
    std::uint64_t env_u = static_cast<std::uint64_t>(env_index);
    batch.env = gen_mdp(config, hash64({master_seed, env_u, 0, kSeedRoleEnv}));
    batch.base_pairs.reserve(config.pairs_per_env);
    batch.interpolants.reserve(config.pairs_per_env);
    for (int p = 0; p < config.pairs_per_env; ++p) {
        std::uint64_t pair_u = static_cast<std::uint64_t>(p);
        RewardTable r1 = gen_reward(config, hash64({master_seed, env_u, pair_u, kSeedRoleRewardFirst}),
                                    config.n_states, config.n_actions);
        RewardTable r2 = gen_reward(config, hash64({master_seed, env_u, pair_u, kSeedRoleRewardSecond}),
                                    config.n_states, config.n_actions);
        batch.interpolants.push_back(interpolate(r1, r2, config.interp_steps));
        batch.base_pairs.emplace_back(std::move(r1), std::move(r2));
    }
    return batch;
}

} // namespace rewardlab
