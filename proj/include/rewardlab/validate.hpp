#pragma once

#include <cstdint>
#include <ostream>

#include "rewardlab/regret.hpp"

namespace rewardlab {

/// Property suites behind the CLI `validate` subcommand. Each prints one
/// line per check group and returns overall success.

/// Pseudometric axioms (symmetry, identity, triangle) for the standard spec
/// set over 200 seeded random triples on 8-state MDPs.
bool acceptance_pseudometric(std::ostream& out);

/// Invariance of VAL- and MinimalL2-based distances under positive scaling,
/// potential shaping and on-support S'-redistribution, 100 seeded cases.
bool acceptance_invariance(std::ostream& out);

/// Zero distance if and only if the enumeration oracle reports an identical
/// policy ordering, on 50 seeded 3-state instances.
bool acceptance_zero_distance_order(std::ostream& out);

/// Pearson form of the EPIC distance against its weighted-norm form on 100
/// random pairs.
bool acceptance_epic_form(std::ostream& out);

/// The three constructed counterexample families behave as built: the
/// successor swap, the impossible-transition cycle, and the off-support
/// inflation ladder.
bool acceptance_counterexamples(std::ostream& out);

/// Worst-case regret LP against the exhaustive policy-pair oracle, and
/// exact against rollout regret on 32-state instances.
bool acceptance_regret_oracle(std::ostream& out);

/// Exhaustive lower-bound oracle for worst_case_regret: all deterministic
/// policy pairs, all coupling-tight two-policy mixtures on either side, and
/// `n_random_pairs` seeded random stochastic pairs. On instances small enough
/// to enumerate this reaches the LP optimum.
double brute_force_worst_case_regret(const Mdp& mdp, const RewardTable& r1,
                                     const RewardTable& r2, int n_random_pairs,
                                     std::uint64_t seed);

} // namespace rewardlab
