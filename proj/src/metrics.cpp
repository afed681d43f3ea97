#include "rewardlab/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace rewardlab {

namespace {

constexpr double kNormGuard = 1e-12; // below this, standardise skips the division

struct SpecTokens {
    std::string canon, norm, dist;
};

SpecTokens split_spec(const std::string& text) {
    auto first = text.find('-');
    auto second = text.find('-', first == std::string::npos ? first : first + 1);
    if (first == std::string::npos || second == std::string::npos ||
        text.find('-', second + 1) != std::string::npos)
        throw Error(ErrorCode::UnknownSpec, "expected CANON-NORM-DIST, got '" + text + "'");
    return {text.substr(0, first), text.substr(first + 1, second - first - 1),
            text.substr(second + 1)};
}

NormId parse_norm_token(const std::string& t) {
    if (t == "0") return NormId::Skip;
    if (t == "1") return NormId::L1;
    if (t == "2") return NormId::L2;
    if (t == "inf") return NormId::Linf;
    if (t == "weighted_1") return NormId::WeightedL1;
    if (t == "weighted_2") return NormId::WeightedL2;
    if (t == "weighted_inf") return NormId::WeightedLinf;
    if (t == "Jrange") return NormId::Jrange;
    throw Error(ErrorCode::UnknownNorm, "'" + t + "'");
}

DistId parse_dist_token(const std::string& t) {
    if (t == "1") return DistId::L1;
    if (t == "2") return DistId::L2;
    if (t == "inf") return DistId::Linf;
    if (t == "weighted_1") return DistId::WeightedL1;
    if (t == "weighted_2") return DistId::WeightedL2;
    if (t == "weighted_inf") return DistId::WeightedLinf;
    if (t == "angle") return DistId::Angle;
    if (t == "pearson") return DistId::Pearson;
    throw Error(ErrorCode::UnknownDist, "'" + t + "'");
}

std::string norm_token(NormId n) {
    switch (n) {
        case NormId::Skip: return "0";
        case NormId::L1: return "1";
        case NormId::L2: return "2";
        case NormId::Linf: return "inf";
        case NormId::WeightedL1: return "weighted_1";
        case NormId::WeightedL2: return "weighted_2";
        case NormId::WeightedLinf: return "weighted_inf";
        case NormId::Jrange: return "Jrange";
    }
    return "?";
}

std::string dist_token(DistId d) {
    switch (d) {
        case DistId::L1: return "1";
        case DistId::L2: return "2";
        case DistId::Linf: return "inf";
        case DistId::WeightedL1: return "weighted_1";
        case DistId::WeightedL2: return "weighted_2";
        case DistId::WeightedLinf: return "weighted_inf";
        case DistId::Angle: return "angle";
        case DistId::Pearson: return "pearson";
    }
    return "?";
}

void check_combination(const MetricSpec& spec) {
    if (spec.canon == CanonId::MinimalPotential &&
        (spec.norm == NormId::Linf || spec.norm == NormId::WeightedLinf))
        throw Error(ErrorCode::ForbiddenCombination,
                    "MinimalPotential cannot be normalised by an L-infinity norm");
}

/// The norm MinimalPotential minimises: follows the normalisation slot when
/// it names a supported norm, and falls back to L2 otherwise.
PotentialNorm potential_norm_for(NormId norm) {
    switch (norm) {
        case NormId::L1: return PotentialNorm::L1;
        case NormId::L2: return PotentialNorm::L2;
        case NormId::WeightedL1: return PotentialNorm::WeightedL1;
        case NormId::WeightedL2: return PotentialNorm::WeightedL2;
        case NormId::Skip:
        case NormId::Jrange: return PotentialNorm::L2;
        case NormId::Linf:
        case NormId::WeightedLinf: break;
    }
    throw Error(ErrorCode::ForbiddenCombination,
                "MinimalPotential cannot minimise an L-infinity norm");
}

RewardTable apply_canon(const MetricSpec& spec, const RewardTable& reward,
                        const Mdp& mdp, const DistributionPair& dists) {
    switch (spec.canon) {
        case CanonId::None: return canon_none(reward);
        case CanonId::EPIC: return canon_epic(reward, mdp.gamma, dists.dist_s, dists.dist_a);
        case CanonId::DARD: return canon_dard(reward, mdp, dists.dist_a);
        case CanonId::MinimalPotential:
            return canon_minimal_potential(reward, mdp, potential_norm_for(spec.norm));
        case CanonId::VALPotential: return canon_val_potential(reward, mdp);
        case CanonId::VAL: return canon_val(reward, mdp);
        case CanonId::MinimalL2: return canon_minimal_l2(reward, mdp);
    }
    throw Error(ErrorCode::UnknownCanon, "unhandled canonicalisation");
}

} // namespace

void DistributionPair::validate() const {
    double sum_s = 0.0, sum_a = 0.0;
    for (double p : dist_s) {
        if (!(p > 0.0)) throw Error(ErrorCode::ZeroSupport, "state distribution");
        sum_s += p;
    }
    for (double p : dist_a) {
        if (!(p > 0.0)) throw Error(ErrorCode::ZeroSupport, "action distribution");
        sum_a += p;
    }
    if (std::abs(sum_s - 1.0) > 1e-12 || std::abs(sum_a - 1.0) > 1e-12)
        throw Error(ErrorCode::BadInitialDistribution,
                    "distribution does not sum to 1");
}

MetricSpec parse_metric_spec(const std::string& text) {
    SpecTokens tokens = split_spec(text);
    MetricSpec spec;
    spec.canon = parse_canon_id(tokens.canon);
    spec.norm = parse_norm_token(tokens.norm);
    spec.dist = parse_dist_token(tokens.dist);
    check_combination(spec);
    return spec;
}

std::string format_metric_spec(const MetricSpec& spec) {
    return std::string(canon_id_name(spec.canon)) + "-" + norm_token(spec.norm) + "-" +
           dist_token(spec.dist);
}

double norm_eval(NormId norm, const RewardTable& reward, const Mdp& mdp) {
    switch (norm) {
        case NormId::Skip:
            throw Error(ErrorCode::SkipNotANorm, "Skip has no value");
        case NormId::L1: {
            double acc = 0.0;
            for (double v : reward.data) acc += std::abs(v);
            return acc;
        }
        case NormId::L2: {
            double acc = 0.0;
            for (double v : reward.data) acc += v * v;
            return std::sqrt(acc);
        }
        case NormId::Linf:
            return reward.max_abs();
        case NormId::WeightedL1: {
            if (!mdp.shape_matches(reward))
                throw Error(ErrorCode::ShapeMismatch, "weighted norm");
            double acc = 0.0;
            for (std::size_t i = 0; i < reward.data.size(); ++i)
                acc += mdp.transition.data[i] * std::abs(reward.data[i]);
            return acc;
        }
        case NormId::WeightedL2: {
            if (!mdp.shape_matches(reward))
                throw Error(ErrorCode::ShapeMismatch, "weighted norm");
            double acc = 0.0;
            for (std::size_t i = 0; i < reward.data.size(); ++i)
                acc += mdp.transition.data[i] * reward.data[i] * reward.data[i];
            return std::sqrt(acc);
        }
        case NormId::WeightedLinf: {
            // p -> inf limit of the tau-weighted L_p family: the sup over the
            // tau-support.
            if (!mdp.shape_matches(reward))
                throw Error(ErrorCode::ShapeMismatch, "weighted norm");
            double m = 0.0;
            for (std::size_t i = 0; i < reward.data.size(); ++i)
                if (mdp.transition.data[i] > 0.0)
                    m = std::max(m, std::abs(reward.data[i]));
            return m;
        }
        case NormId::Jrange: {
            double j_max = policy_return_J(mdp, reward, optimal_policy(mdp, reward));
            double j_min = policy_return_J(mdp, reward, worst_policy(mdp, reward));
            return j_max - j_min;
        }
    }
    throw Error(ErrorCode::UnknownNorm, "unhandled norm");
}

RewardTable standardise(const MetricSpec& spec, const RewardTable& reward,
                        const Mdp& mdp, const DistributionPair& dists) {
    check_combination(spec);
    RewardTable c = apply_canon(spec, reward, mdp, dists);
    if (spec.norm == NormId::Skip) return c;
    double n = norm_eval(spec.norm, c, mdp);
    if (n > kNormGuard) c *= 1.0 / n;
    return c;
}

double weighted_l2_dist_norm(const RewardTable& a, const DistributionPair& dists) {
    double acc = 0.0;
    for (int s = 0; s < a.dim_s; ++s)
        for (int ac = 0; ac < a.dim_a; ++ac) {
            double w_sa = dists.dist_s[s] * dists.dist_a[ac];
            const double* row = a.row(s, ac);
            for (int s2 = 0; s2 < a.dim_s2; ++s2)
                acc += w_sa * dists.dist_s[s2] * row[s2] * row[s2];
        }
    return std::sqrt(acc);
}

namespace {

/// Centers by the weighted mean and scales to unit weighted standard
/// deviation. Throws on zero variance.
RewardTable pearson_standardise(const RewardTable& a, const DistributionPair& dists) {
    double mean = 0.0;
    for (int s = 0; s < a.dim_s; ++s)
        for (int ac = 0; ac < a.dim_a; ++ac) {
            double w_sa = dists.dist_s[s] * dists.dist_a[ac];
            const double* row = a.row(s, ac);
            for (int s2 = 0; s2 < a.dim_s2; ++s2)
                mean += w_sa * dists.dist_s[s2] * row[s2];
        }
    RewardTable centered = a;
    for (double& v : centered.data) v -= mean;
    double sigma = weighted_l2_dist_norm(centered, dists);
    if (!(sigma > 0.0))
        throw Error(ErrorCode::ZeroVariance, "constant input to Pearson correlation");
    centered *= 1.0 / sigma;
    return centered;
}

/// Pearson distance sqrt((1 - rho)/2), computed as half the weighted L2
/// distance of the standardised tensors. Equal up to algebra, but exact at 0
/// where the correlation route loses half the significant digits.
double pearson_distance(const RewardTable& a, const RewardTable& b,
                        const DistributionPair& dists) {
    RewardTable xa = pearson_standardise(a, dists);
    RewardTable xb = pearson_standardise(b, dists);
    return 0.5 * weighted_l2_dist_norm(xa - xb, dists);
}

} // namespace

double weighted_pearson_rho(const RewardTable& a, const RewardTable& b,
                            const DistributionPair& dists) {
    require_same_shape(a, b, "pearson");
    RewardTable xa = pearson_standardise(a, dists);
    RewardTable xb = pearson_standardise(b, dists);
    double rho = 0.0;
    for (int s = 0; s < a.dim_s; ++s)
        for (int ac = 0; ac < a.dim_a; ++ac) {
            double w_sa = dists.dist_s[s] * dists.dist_a[ac];
            const double* ra = xa.row(s, ac);
            const double* rb = xb.row(s, ac);
            for (int s2 = 0; s2 < a.dim_s2; ++s2)
                rho += w_sa * dists.dist_s[s2] * ra[s2] * rb[s2];
        }
    return std::clamp(rho, -1.0, 1.0);
}

double distance_eval(DistId dist, const RewardTable& a, const RewardTable& b,
                     const Mdp& mdp, const DistributionPair& dists) {
    require_same_shape(a, b, "distance");
    switch (dist) {
        case DistId::L1: return norm_eval(NormId::L1, a - b, mdp);
        case DistId::L2: return norm_eval(NormId::L2, a - b, mdp);
        case DistId::Linf: return norm_eval(NormId::Linf, a - b, mdp);
        case DistId::WeightedL1: return norm_eval(NormId::WeightedL1, a - b, mdp);
        case DistId::WeightedL2: return norm_eval(NormId::WeightedL2, a - b, mdp);
        case DistId::WeightedLinf: return norm_eval(NormId::WeightedLinf, a - b, mdp);
        case DistId::Angle: {
            double na = 0.0, nb = 0.0;
            for (std::size_t i = 0; i < a.data.size(); ++i) {
                na += a.data[i] * a.data[i];
                nb += b.data[i] * b.data[i];
            }
            na = std::sqrt(na);
            nb = std::sqrt(nb);
            if (na == 0.0 && nb == 0.0) return 0.0;
            if (na == 0.0 || nb == 0.0) return M_PI / 2.0;
            // Angle between the unit vectors via 2 atan2(|u-v|, |u+v|),
            // which stays accurate where acos flattens out.
            double diff = 0.0, sum = 0.0;
            for (std::size_t i = 0; i < a.data.size(); ++i) {
                double u = a.data[i] / na;
                double v = b.data[i] / nb;
                diff += (u - v) * (u - v);
                sum += (u + v) * (u + v);
            }
            return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
        }
        case DistId::Pearson:
            return pearson_distance(a, b, dists);
    }
    throw Error(ErrorCode::UnknownDist, "unhandled distance");
}

double starc_distance(const MetricSpec& spec, const RewardTable& r1,
                      const RewardTable& r2, const Mdp& mdp,
                      const DistributionPair& dists) {
    RewardTable s1 = standardise(spec, r1, mdp, dists);
    RewardTable s2 = standardise(spec, r2, mdp, dists);
    return distance_eval(spec.dist, s1, s2, mdp, dists);
}

namespace {

/// Shared body of the original EPIC and DARD distances: Pearson distance of
/// two canonicalised rewards, with near-zero canonical forms rejected.
double pearson_form_distance(const RewardTable& c1, const RewardTable& c2,
                             double scale1, double scale2,
                             const DistributionPair& dists) {
    constexpr double kZeroCanonTol = 1e-12;
    if (c1.max_abs() <= kZeroCanonTol * (1.0 + scale1) ||
        c2.max_abs() <= kZeroCanonTol * (1.0 + scale2))
        throw Error(ErrorCode::ZeroCanon,
                    "canonicalised reward is zero; Pearson distance undefined");
    return pearson_distance(c1, c2, dists);
}

} // namespace

double epic_distance(const RewardTable& r1, const RewardTable& r2, double gamma,
                     const DistributionPair& dists) {
    require_same_shape(r1, r2, "epic_distance");
    dists.validate();
    RewardTable c1 = canon_epic(r1, gamma, dists.dist_s, dists.dist_a);
    RewardTable c2 = canon_epic(r2, gamma, dists.dist_s, dists.dist_a);
    return pearson_form_distance(c1, c2, r1.max_abs(), r2.max_abs(), dists);
}

double dard_distance(const RewardTable& r1, const RewardTable& r2, const Mdp& mdp,
                     const DistributionPair& dists) {
    require_same_shape(r1, r2, "dard_distance");
    dists.validate();
    RewardTable c1 = canon_dard(r1, mdp, dists.dist_a);
    RewardTable c2 = canon_dard(r2, mdp, dists.dist_a);
    return pearson_form_distance(c1, c2, r1.max_abs(), r2.max_abs(), dists);
}

} // namespace rewardlab
