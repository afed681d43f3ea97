#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rewardlab/rng.hpp"
#include "rewardlab/tensor.hpp"

namespace rewardlab {

/// Finite Markov decision process without a fixed reward: state and action
/// counts, transition tensor tau[s][a][s'], initial distribution mu0 and
/// discount gamma in (0,1). Rewards travel separately as RewardTable so one
/// environment can be paired with many rewards.
struct Mdp {
    int n_states = 0;
    int n_actions = 0;
    Tensor3 transition;
    std::vector<double> mu0;
    double gamma = 0.0;

    bool shape_matches(const Tensor3& reward) const {
        return reward.dim_s == n_states && reward.dim_a == n_actions &&
               reward.dim_s2 == n_states;
    }
};

/// Deterministic or stochastic policy over a finite MDP.
struct Policy {
    enum class Kind { Deterministic, Stochastic };

    Kind kind = Kind::Deterministic;
    std::vector<int> det;      // action per state (deterministic)
    std::vector<double> stoch; // row-major [s][a] (stochastic)

    static Policy deterministic(std::vector<int> actions) {
        Policy p;
        p.kind = Kind::Deterministic;
        p.det = std::move(actions);
        return p;
    }

    static Policy stochastic(int n_states, int n_actions, std::vector<double> probs) {
        if (probs.size() != static_cast<std::size_t>(n_states) * n_actions)
            throw Error(ErrorCode::ShapeMismatch, "stochastic policy matrix size");
        Policy p;
        p.kind = Kind::Stochastic;
        p.stoch = std::move(probs);
        return p;
    }

    static Policy uniform(int n_states, int n_actions) {
        Policy p;
        p.kind = Kind::Stochastic;
        p.stoch.assign(static_cast<std::size_t>(n_states) * n_actions,
                       1.0 / n_actions);
        return p;
    }

    /// pi(a | s)
    double prob(int s, int a, int n_actions) const {
        if (kind == Kind::Deterministic) return det[s] == a ? 1.0 : 0.0;
        return stoch[static_cast<std::size_t>(s) * n_actions + a];
    }
};

using ValueVector = Eigen::VectorXd;

/// Discounted transition-visitation mass of a policy. m[s][a][s'] is the
/// expected discounted count of traversals of (s,a,s'); d[s][a] is the
/// state-action marginal. Total mass is 1/(1-gamma).
struct OccupancyMeasure {
    Tensor3 m;
    std::vector<double> d; // row-major [s][a]

    double total_mass() const {
        double acc = 0.0;
        for (double v : m.data) acc += v;
        return acc;
    }
};

/// Fixed-horizon path through an MDP.
struct Trajectory {
    struct Step {
        int state;
        int action;
        int next_state;
    };
    std::vector<Step> steps;
};

/// Checks every structural invariant of the MDP: stochastic transition rows,
/// a valid initial distribution, gamma strictly inside (0,1), and that every
/// state carries positive occupancy mass under the uniform policy.
void validate_mdp(const Mdp& mdp);

void validate_policy(const Mdp& mdp, const Policy& pi);

/// Exact policy evaluation: solves (I - gamma P_pi) V = r_pi by dense LU.
ValueVector policy_eval_V(const Mdp& mdp, const RewardTable& reward, const Policy& pi);

/// J(pi) = mu0 . V_pi
double policy_return_J(const Mdp& mdp, const RewardTable& reward, const Policy& pi);

/// Greedy deterministic policy from Q-iteration (sup-norm tolerance 1e-10,
/// iteration cap 1e5). Ties break toward the lowest action index.
Policy optimal_policy(const Mdp& mdp, const RewardTable& reward);

/// optimal_policy of the negated reward.
Policy worst_policy(const Mdp& mdp, const RewardTable& reward);

/// Discounted occupancy measure of a policy, from the exact flow solve.
OccupancyMeasure occupancy(const Mdp& mdp, const Policy& pi);

/// One sampled trajectory of exactly `horizon` steps from (pi, tau).
Trajectory simulate_trajectory(const Mdp& mdp, const Policy& pi, int start_state,
                               int horizon, Rng& rng);

/// Discounted return of a trajectory under the given reward.
double trajectory_return(const RewardTable& reward, const Trajectory& traj, double gamma);

/// Discounted return of one sampled trajectory; deterministic given the rng state.
double simulate_return(const Mdp& mdp, const RewardTable& reward, const Policy& pi,
                       int start_state, int horizon, Rng& rng);

/// Expected immediate reward per (s,a): rbar[s][a] = sum_{s'} tau R.
/// Row-major [s][a].
std::vector<double> expected_reward_sa(const Mdp& mdp, const RewardTable& reward);

/// Smallest t with gamma^t < cutoff (used as the rollout horizon).
int horizon_for_cutoff(double gamma, double cutoff);

} // namespace rewardlab
