#pragma once

#include <string>
#include <vector>

#include "rewardlab/canon.hpp"
#include "rewardlab/mdp.hpp"
#include "rewardlab/tensor.hpp"

namespace rewardlab {

/// Norms usable in the normalisation slot of a metric spec. Weighted
/// variants weight per-transition by tau. Jrange is the span of policy
/// returns, max_pi J - min_pi J. Skip disables normalisation.
enum class NormId {
    L1,
    L2,
    Linf,
    WeightedL1,
    WeightedL2,
    WeightedLinf,
    Jrange,
    Skip,
};

/// Distances usable in the final slot. Norm ids measure norm(a - b); Angle
/// is the angle between flattened tensors; Pearson is sqrt((1 - rho)/2)
/// under the configured state/action distributions.
enum class DistId {
    L1,
    L2,
    Linf,
    WeightedL1,
    WeightedL2,
    WeightedLinf,
    Angle,
    Pearson,
};

/// One pseudometric: canonicalise, normalise, measure.
/// String form "CANON-NORM-DIST", e.g. "VAL-2-2" or "EPIC-0-inf".
struct MetricSpec {
    CanonId canon = CanonId::None;
    NormId norm = NormId::Skip;
    DistId dist = DistId::L2;
};

MetricSpec parse_metric_spec(const std::string& text);
std::string format_metric_spec(const MetricSpec& spec);

/// State and action distributions for EPIC/DARD canonicalisation and for
/// Pearson weighting. Both must be strictly positive.
struct DistributionPair {
    std::vector<double> dist_s;
    std::vector<double> dist_a;

    static DistributionPair uniform(int n_states, int n_actions) {
        DistributionPair d;
        d.dist_s.assign(n_states, 1.0 / n_states);
        d.dist_a.assign(n_actions, 1.0 / n_actions);
        return d;
    }

    void validate() const;
};

double norm_eval(NormId norm, const RewardTable& reward, const Mdp& mdp);

/// c(R), then division by n(c(R)) when that norm exceeds 1e-12 (and the
/// norm slot is not Skip).
RewardTable standardise(const MetricSpec& spec, const RewardTable& reward,
                        const Mdp& mdp, const DistributionPair& dists);

double distance_eval(DistId dist, const RewardTable& a, const RewardTable& b,
                     const Mdp& mdp, const DistributionPair& dists);

/// d(R1, R2) = m(s(R1), s(R2)) with the configured canonicalisation,
/// normalisation and distance.
double starc_distance(const MetricSpec& spec, const RewardTable& r1,
                      const RewardTable& r2, const Mdp& mdp,
                      const DistributionPair& dists);

/// Original EPIC: Pearson distance between EPIC-canonicalised rewards under
/// dist_s (x) dist_a (x) dist_s. Value in [0, 1].
double epic_distance(const RewardTable& r1, const RewardTable& r2, double gamma,
                     const DistributionPair& dists);

/// Original DARD: as epic_distance but with the dynamics-aware
/// canonicalisation. Value in [0, 1].
double dard_distance(const RewardTable& r1, const RewardTable& r2, const Mdp& mdp,
                     const DistributionPair& dists);

/// Weighted Pearson correlation of two tensors under
/// dist_s (x) dist_a (x) dist_s. Throws ZeroVariance when either side is
/// constant under the weights.
double weighted_pearson_rho(const RewardTable& a, const RewardTable& b,
                            const DistributionPair& dists);

/// Weighted L2 norm under dist_s (x) dist_a (x) dist_s.
double weighted_l2_dist_norm(const RewardTable& a, const DistributionPair& dists);

} // namespace rewardlab
