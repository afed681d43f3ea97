#pragma once

#include <cstdint>

#include "rewardlab/mdp.hpp"
#include "rewardlab/tensor.hpp"

namespace rewardlab {

enum class RegretMode { Exact, Rollout };

/// Averaged two-sided normalised regret between a reward pair, using the
/// optimal and worst policies of each side. Components are clamped to [0,1];
/// a vanishing denominator is replaced by 1 (its numerator is then 0 too).
struct RegretReport {
    double regret = 0.0;
    double reg_forward = 0.0;
    double reg_backward = 0.0;
    Policy pi_1;     // optimal under r1
    Policy pi_2;     // optimal under r2
    Policy pi_x;     // worst under r1
    Policy pi_y;     // worst under r2
};

/// Computes the regret report. Exact mode evaluates all returns by linear
/// solve. Rollout mode estimates each return from one simulated episode per
/// start state, weighted by mu0, with horizon min{t : gamma^t < 1e-5};
/// deterministic given the seed.
RegretReport optimal_pair_regret(const Mdp& mdp, const RewardTable& r1,
                                 const RewardTable& r2, RegretMode mode,
                                 std::uint64_t seed);

/// Same computation with r1's optimal/worst policies supplied by the caller
/// (they are often shared across many r2 candidates).
RegretReport pair_regret_with_policies(const Mdp& mdp, const RewardTable& r1,
                                       const RewardTable& r2, const Policy& pi_1,
                                       const Policy& pi_x, RegretMode mode,
                                       std::uint64_t seed);

/// Worst-case normalised regret: the maximum over policy pairs (pi_1, pi_2)
/// with J_2(pi_2) >= J_2(pi_1) of (J_1(pi_1) - J_1(pi_2)) / Jrange(r1),
/// solved exactly as a linear program over paired occupancy measures.
/// Result clamped to [0,1]; a degenerate r1 (zero Jrange) gives 0.
double worst_case_regret(const Mdp& mdp, const RewardTable& r1, const RewardTable& r2);

/// Enumeration oracle: true iff r1 and r2 rank all deterministic policies
/// plus 200 seeded random stochastic policies identically (ties matching).
/// Limited to n_states <= 4, n_actions <= 3.
bool policy_order_equal(const Mdp& mdp, const RewardTable& r1, const RewardTable& r2);

/// A reward pair with known, construction-checked behaviour under the
/// different metrics, plus the environment it was verified in.
struct CounterexamplePair {
    enum class Family { SuccessorSwap, OffSupportInflation, DardCycle };

    RewardTable r1;
    RewardTable r2;
    Mdp mdp;
    Family family;
    double parameter = 0.0;
};

/// Two rewards supported on one state-action row with their two successor
/// entries swapped: (1, eps) against (eps, 1). They order policies
/// identically under every transition function, yet no potential-shaping
/// canonicalisation can identify them, so the EPIC distance stays positive.
/// Requires eps in (0,1).
CounterexamplePair make_successor_swap_pair(int n_states, int n_actions, double epsilon);

/// On a deterministic-transition MDP: R1 = eps r + M u, R2 = -eps r + M u,
/// where r rewards reachable action-0 transitions and u sits only on
/// impossible transitions. Worst-case regret stays 1 for every M while the
/// inflation drives the EPIC distance toward 0.
CounterexamplePair make_offsupport_inflation_pair(const Mdp& mdp, double epsilon,
                                                  double inflation);

/// The 3-state deterministic cycle where both rewards vanish on every
/// possible transition but differ on impossible ones, split by action.
/// The DARD distance is positive even though both rewards are trivial.
CounterexamplePair make_dard_cycle_pair();

} // namespace rewardlab
