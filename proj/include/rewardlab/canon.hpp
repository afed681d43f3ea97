#pragma once

#include <string>
#include <vector>

#include "rewardlab/mdp.hpp"
#include "rewardlab/tensor.hpp"

namespace rewardlab {

/// Per-state potential used for reward shaping.
using PotentialVector = std::vector<double>;

/// The canonicalisation (and pseudo-canonicalisation) functions selectable in
/// a metric spec. VAL and MinimalL2 collapse both potential shaping and
/// S'-redistribution; the others remove shaping only (or nothing, for None).
enum class CanonId {
    None,
    EPIC,
    DARD,
    MinimalPotential,
    VALPotential,
    VAL,
    MinimalL2,
};

const char* canon_id_name(CanonId id);
CanonId parse_canon_id(const std::string& text);

/// Norms a MinimalPotential canonicalisation can minimise.
enum class PotentialNorm { L1, L2, WeightedL1, WeightedL2 };

/// R'(s,a,s') = R(s,a,s') + gamma Phi(s') - Phi(s)
RewardTable apply_shaping(const RewardTable& reward, const PotentialVector& phi,
                          const Mdp& mdp);

/// Value-adjusted levelling: per (s,a), the tau-expectation of
/// R(s,a,S') + gamma V(S'), minus V(s), written constant along the s' axis.
/// V is the exact value function of `pi` under `reward`.
RewardTable canon_val(const RewardTable& reward, const Mdp& mdp, const Policy& pi);
RewardTable canon_val(const RewardTable& reward, const Mdp& mdp); // uniform policy

/// R(s,a,s') - V(s) + gamma V(s'), no expectation over s'.
RewardTable canon_val_potential(const RewardTable& reward, const Mdp& mdp,
                                const Policy& pi);
RewardTable canon_val_potential(const RewardTable& reward, const Mdp& mdp);

/// Dynamics-free canonicalisation: adjusts by means over independent draws
/// from the state and action distributions. Exact summation, no sampling.
/// Needs the discount but no transition function.
RewardTable canon_epic(const RewardTable& reward, double gamma,
                       const std::vector<double>& dist_s,
                       const std::vector<double>& dist_a);

/// Dynamics-aware canonicalisation: adjusts by tau-conditional expectations,
/// with the double-expectation term taking its two next-states independently
/// given the action.
RewardTable canon_dard(const RewardTable& reward, const Mdp& mdp,
                       const std::vector<double>& dist_a);

/// Shifts the reward by the potential that minimises the chosen norm of the
/// result. (Weighted-)L2 is solved by normal equations; (weighted-)L1 by
/// iteratively reweighted least squares started from Phi = 0.
RewardTable canon_minimal_potential(const RewardTable& reward, const Mdp& mdp,
                                    PotentialNorm norm);

/// Weighted-L2-minimal canonicalisation: orthogonal projection of R onto the
/// complement of the span of all shaping and S'-redistribution directions,
/// in the inner product defined by the weight tensor.
RewardTable canon_minimal_l2(const RewardTable& reward, const Mdp& mdp,
                             const Tensor3& weights);
RewardTable canon_minimal_l2(const RewardTable& reward, const Mdp& mdp); // unit weights

RewardTable canon_none(const RewardTable& reward);

} // namespace rewardlab
