#include <doctest.h>

#include <cmath>

#include "rewardlab/canon.hpp"
#include "rewardlab/metrics.hpp"
#include "test_util.hpp"

using namespace rewardlab;
using namespace testutil;

namespace {

/// Random perturbation that keeps every tau-expected row value fixed,
/// supported on the tau-support.
RewardTable with_redistribution(const RewardTable& reward, const Mdp& mdp,
                                std::uint64_t seed, double scale) {
    Rng rng(seed);
    RewardTable out = reward;
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            const double* tau = mdp.transition.row(s, a);
            double* row = out.row(s, a);
            int anchor = 0;
            for (int s2 = 1; s2 < mdp.n_states; ++s2)
                if (tau[s2] > tau[anchor]) anchor = s2;
            if (tau[anchor] <= 0.0) continue;
            double drift = 0.0;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) {
                if (tau[s2] <= 0.0 || s2 == anchor) continue;
                double w = scale * rng.gaussian();
                row[s2] += w;
                drift += tau[s2] * w;
            }
            row[anchor] -= drift / tau[anchor];
        }
    return out;
}

using CanonFn = RewardTable (*)(const RewardTable&, const Mdp&);

RewardTable run_epic(const RewardTable& r, const Mdp& mdp) {
    DistributionPair d = DistributionPair::uniform(mdp.n_states, mdp.n_actions);
    return canon_epic(r, mdp.gamma, d.dist_s, d.dist_a);
}
RewardTable run_dard(const RewardTable& r, const Mdp& mdp) {
    DistributionPair d = DistributionPair::uniform(mdp.n_states, mdp.n_actions);
    return canon_dard(r, mdp, d.dist_a);
}
RewardTable run_val(const RewardTable& r, const Mdp& mdp) { return canon_val(r, mdp); }
RewardTable run_val_potential(const RewardTable& r, const Mdp& mdp) {
    return canon_val_potential(r, mdp);
}
RewardTable run_minimal_potential(const RewardTable& r, const Mdp& mdp) {
    return canon_minimal_potential(r, mdp, PotentialNorm::L2);
}
RewardTable run_minimal_l2(const RewardTable& r, const Mdp& mdp) {
    return canon_minimal_l2(r, mdp);
}

struct NamedCanon {
    const char* name;
    CanonFn fn;
};

const NamedCanon kAllCanons[] = {
    {"EPIC", run_epic},           {"DARD", run_dard},
    {"VAL", run_val},             {"VALPotential", run_val_potential},
    {"MinimalPotential", run_minimal_potential}, {"MinimalL2", run_minimal_l2},
};

} // namespace

TEST_CASE("apply_shaping with a zero potential is the identity") {
    Mdp mdp = random_mdp(4, 2, 0.9, 1);
    RewardTable r = random_reward(4, 2, 2);
    RewardTable shaped = apply_shaping(r, PotentialVector(4, 0.0), mdp);
    CHECK(sup_diff(shaped, r) == 0.0);
}

TEST_CASE("apply_shaping with a constant potential shifts every entry") {
    Mdp mdp = random_mdp(3, 2, 0.85, 3);
    RewardTable r = random_reward(3, 2, 4);
    const double k = 2.5;
    RewardTable shaped = apply_shaping(r, PotentialVector(3, k), mdp);
    for (std::size_t i = 0; i < r.data.size(); ++i)
        CHECK(shaped.data[i] - r.data[i] ==
              doctest::Approx((0.85 - 1.0) * k).epsilon(1e-14));
}

TEST_CASE("shaping shifts every policy return by the initial potential") {
    Mdp mdp = random_mdp(5, 2, 0.9, 5);
    RewardTable r = random_reward(5, 2, 6, 2.0);
    PotentialVector phi = random_potential(5, 7, 3.0);
    RewardTable shaped = apply_shaping(r, phi, mdp);
    double phi_at_start = 0.0;
    for (int s = 0; s < 5; ++s) phi_at_start += mdp.mu0[s] * phi[s];
    for (std::uint64_t k = 0; k < 10; ++k) {
        Policy pi = random_stochastic_policy(5, 2, 100 + k);
        double j0 = policy_return_J(mdp, r, pi);
        double j1 = policy_return_J(mdp, shaped, pi);
        CHECK(std::abs(j1 - (j0 - phi_at_start)) <= 1e-8 * (1.0 + std::abs(j0)));
    }
}

TEST_CASE("constant rewards canonicalise to zero") {
    Mdp mdp = random_mdp(4, 2, 0.9, 8);
    RewardTable k = constant_reward(4, 2, 3.7);
    for (const NamedCanon& canon : kAllCanons) {
        CAPTURE(canon.name);
        CHECK(canon.fn(k, mdp).max_abs() <= 1e-12);
    }
}

TEST_CASE("canon_val output is constant along the successor axis") {
    Mdp mdp = random_mdp(5, 3, 0.9, 9);
    RewardTable c = canon_val(random_reward(5, 3, 10, 2.0), mdp);
    for (int s = 0; s < 5; ++s)
        for (int a = 0; a < 3; ++a) {
            const double* row = c.row(s, a);
            for (int s2 = 1; s2 < 5; ++s2) CHECK(std::abs(row[s2] - row[0]) <= 1e-12);
        }
}

TEST_CASE("canon_val is idempotent") {
    Mdp mdp = random_mdp(4, 2, 0.9, 11);
    RewardTable c = canon_val(random_reward(4, 2, 12, 3.0), mdp);
    CHECK(sup_diff(canon_val(c, mdp), c) <= 1e-10);
}

TEST_CASE("every canonicalisation removes potential shaping") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Mdp mdp = random_mdp(4, 2, 0.9, 20 + seed);
        RewardTable r = random_reward(4, 2, 30 + seed, 2.0);
        PotentialVector phi = random_potential(4, 40 + seed, 4.0);
        RewardTable shaped = apply_shaping(r, phi, mdp);
        for (const NamedCanon& canon : kAllCanons) {
            CAPTURE(canon.name);
            RewardTable a = canon.fn(r, mdp);
            RewardTable b = canon.fn(shaped, mdp);
            CHECK(sup_diff(a, b) <= 1e-8 * (1.0 + a.max_abs()));
        }
    }
}

TEST_CASE("VAL and MinimalL2 also remove on-support redistribution") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Mdp mdp = random_mdp(4, 2, 0.9, 50 + seed);
        RewardTable r = random_reward(4, 2, 60 + seed, 2.0);
        RewardTable moved = with_redistribution(r, mdp, 70 + seed, 1.5);
        for (CanonFn fn : {run_val, run_minimal_l2}) {
            RewardTable a = fn(r, mdp);
            RewardTable b = fn(moved, mdp);
            CHECK(sup_diff(a, b) <= 1e-8 * (1.0 + a.max_abs()));
        }
    }
}

TEST_CASE("canonicalisations are linear maps") {
    Mdp mdp = random_mdp(4, 2, 0.9, 80);
    RewardTable r1 = random_reward(4, 2, 81, 2.0);
    RewardTable r2 = random_reward(4, 2, 82, 2.0);
    const double alpha = 1.7, beta = -0.6;
    RewardTable combo = alpha * r1 + beta * r2;
    for (const NamedCanon& canon : kAllCanons) {
        CAPTURE(canon.name);
        RewardTable lhs = canon.fn(combo, mdp);
        RewardTable rhs = alpha * canon.fn(r1, mdp) + beta * canon.fn(r2, mdp);
        CHECK(sup_diff(lhs, rhs) <= 1e-9 * (1.0 + lhs.max_abs()));
    }
}

TEST_CASE("the successor expectation of VALPotential equals VAL") {
    Mdp mdp = random_mdp(5, 2, 0.92, 90);
    RewardTable r = random_reward(5, 2, 91, 2.0);
    RewardTable vp = canon_val_potential(r, mdp);
    RewardTable v = canon_val(r, mdp);
    for (int s = 0; s < 5; ++s)
        for (int a = 0; a < 2; ++a) {
            double acc = 0.0;
            for (int s2 = 0; s2 < 5; ++s2) acc += mdp.transition(s, a, s2) * vp(s, a, s2);
            CHECK(acc == doctest::Approx(v(s, a, 0)).epsilon(1e-10));
        }
}

TEST_CASE("canon_epic output has zero weighted mean") {
    Rng rng(100);
    const int S = 6, A = 3;
    RewardTable r = random_reward(S, A, 101, 3.0);
    DistributionPair d;
    d.dist_s.resize(S);
    d.dist_a.resize(A);
    double sum_s = 0.0, sum_a = 0.0;
    for (double& p : d.dist_s) sum_s += (p = rng.uniform() + 0.1);
    for (double& p : d.dist_a) sum_a += (p = rng.uniform() + 0.1);
    for (double& p : d.dist_s) p /= sum_s;
    for (double& p : d.dist_a) p /= sum_a;

    RewardTable c = canon_epic(r, 0.9, d.dist_s, d.dist_a);
    double mean = 0.0;
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            for (int s2 = 0; s2 < S; ++s2)
                mean += d.dist_s[s] * d.dist_a[a] * d.dist_s[s2] * c(s, a, s2);
    CHECK(std::abs(mean) <= 1e-10);
}

TEST_CASE("canon_epic rejects distributions without full support") {
    RewardTable r = random_reward(3, 2, 103);
    std::vector<double> bad_s = {0.5, 0.5, 0.0};
    std::vector<double> ok_a = {0.5, 0.5};
    CHECK_THROWS_AS(canon_epic(r, 0.9, bad_s, ok_a), Error);
}

TEST_CASE("canon_epic matches a literal evaluation of its definition") {
    const int S = 3, A = 2;
    const double gamma = 0.87;
    RewardTable r = random_reward(S, A, 104, 2.0);
    std::vector<double> ds = {0.5, 0.3, 0.2};
    std::vector<double> da = {0.6, 0.4};
    RewardTable fast = canon_epic(r, gamma, ds, da);

    // Oracle: spell out every expectation as explicit sums.
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            for (int s2 = 0; s2 < S; ++s2) {
                double term_next = 0.0, term_here = 0.0, term_all = 0.0;
                for (int b = 0; b < A; ++b)
                    for (int x = 0; x < S; ++x) {
                        term_next += da[b] * ds[x] * r(s2, b, x);
                        term_here += da[b] * ds[x] * r(s, b, x);
                        for (int y = 0; y < S; ++y)
                            term_all += ds[x] * da[b] * ds[y] * r(x, b, y);
                    }
                double expected =
                    r(s, a, s2) + gamma * term_next - term_here - gamma * term_all;
                CHECK(fast(s, a, s2) == doctest::Approx(expected).epsilon(1e-12));
            }
}

TEST_CASE("canon_dard matches a literal evaluation of its definition") {
    Mdp mdp = random_mdp(3, 2, 0.9, 105);
    RewardTable r = random_reward(3, 2, 106, 2.0);
    std::vector<double> da = {0.7, 0.3};
    RewardTable fast = canon_dard(r, mdp, da);

    const int S = 3, A = 2;
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            for (int s2 = 0; s2 < S; ++s2) {
                double adjust = 0.0;
                for (int b = 0; b < A; ++b) {
                    double next_mean = 0.0, here_mean = 0.0, both_mean = 0.0;
                    for (int y = 0; y < S; ++y)
                        next_mean += mdp.transition(s2, b, y) * r(s2, b, y);
                    for (int x = 0; x < S; ++x)
                        here_mean += mdp.transition(s, b, x) * r(s, b, x);
                    for (int x = 0; x < S; ++x)
                        for (int y = 0; y < S; ++y)
                            both_mean += mdp.transition(s, b, x) *
                                         mdp.transition(s2, b, y) * r(x, b, y);
                    adjust += da[b] * (mdp.gamma * next_mean - here_mean -
                                       mdp.gamma * both_mean);
                }
                CHECK(fast(s, a, s2) ==
                      doctest::Approx(r(s, a, s2) + adjust).epsilon(1e-12));
            }
}

TEST_CASE("canon_dard is not idempotent") {
    Mdp mdp = random_mdp(3, 2, 0.9, 110);
    RewardTable r = random_reward(3, 2, 111, 2.0);
    DistributionPair d = DistributionPair::uniform(3, 2);
    RewardTable once = canon_dard(r, mdp, d.dist_a);
    RewardTable twice = canon_dard(once, mdp, d.dist_a);
    CHECK(sup_diff(once, twice) > 1e-6);
}

TEST_CASE("minimal potential leaves an already-minimal input unchanged") {
    Mdp mdp = random_mdp(4, 2, 0.9, 120);
    RewardTable minimal = canon_minimal_potential(random_reward(4, 2, 121, 2.0), mdp,
                                                  PotentialNorm::L2);
    RewardTable again = canon_minimal_potential(minimal, mdp, PotentialNorm::L2);
    CHECK(sup_diff(minimal, again) <= 1e-9);
}

TEST_CASE("minimal potential maps pure shaping to zero") {
    Mdp mdp = random_mdp(4, 2, 0.9, 122);
    RewardTable zero = constant_reward(4, 2, 0.0);
    RewardTable shaped = apply_shaping(zero, random_potential(4, 123, 5.0), mdp);
    for (PotentialNorm norm : {PotentialNorm::L1, PotentialNorm::L2,
                               PotentialNorm::WeightedL1, PotentialNorm::WeightedL2})
        CHECK(canon_minimal_potential(shaped, mdp, norm).max_abs() <= 1e-8);
}

TEST_CASE("minimal potential is minimal against random probes") {
    Mdp mdp = random_mdp(4, 2, 0.9, 124);
    RewardTable r = random_reward(4, 2, 125, 2.0);
    RewardTable c = canon_minimal_potential(r, mdp, PotentialNorm::L2);
    double c_norm = norm_eval(NormId::L2, c, mdp);
    for (std::uint64_t k = 0; k < 100; ++k) {
        RewardTable probe = apply_shaping(r, random_potential(4, 200 + k, 2.0), mdp);
        CHECK(c_norm <= norm_eval(NormId::L2, probe, mdp) + 1e-9);
    }
}

TEST_CASE("weighted-L1 minimal potential beats random probes on its own objective") {
    Mdp mdp = random_mdp(3, 2, 0.9, 126);
    RewardTable r = random_reward(3, 2, 127, 2.0);
    RewardTable c = canon_minimal_potential(r, mdp, PotentialNorm::WeightedL1);
    double c_norm = norm_eval(NormId::WeightedL1, c, mdp);
    CHECK(c_norm <= norm_eval(NormId::WeightedL1, r, mdp) + 1e-9);
    for (std::uint64_t k = 0; k < 100; ++k) {
        RewardTable probe = apply_shaping(r, random_potential(3, 300 + k, 1.5), mdp);
        CHECK(c_norm <= norm_eval(NormId::WeightedL1, probe, mdp) + 1e-6);
    }
}

TEST_CASE("minimal-L2 kills shaping plus redistribution of zero") {
    Mdp mdp = random_mdp(4, 2, 0.9, 130);
    RewardTable zero = constant_reward(4, 2, 0.0);
    RewardTable member =
        with_redistribution(apply_shaping(zero, random_potential(4, 131, 3.0), mdp),
                            mdp, 132, 2.0);
    CHECK(canon_minimal_l2(member, mdp).max_abs() <= 1e-8);
}

TEST_CASE("minimal-L2 projection is idempotent") {
    Mdp mdp = random_mdp(4, 2, 0.9, 133);
    RewardTable c = canon_minimal_l2(random_reward(4, 2, 134, 2.0), mdp);
    CHECK(sup_diff(canon_minimal_l2(c, mdp), c) <= 1e-9);
}

TEST_CASE("minimal-L2 respects tau-weighted custom weights") {
    Mdp mdp = random_mdp(3, 2, 0.9, 135);
    RewardTable r = random_reward(3, 2, 136, 2.0);
    Tensor3 weights = mdp.transition; // strictly positive after softmax
    RewardTable c = canon_minimal_l2(r, mdp, weights);
    // Minimality in the weighted norm against random class members.
    auto weighted_norm = [&](const RewardTable& x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.data.size(); ++i)
            acc += weights.data[i] * x.data[i] * x.data[i];
        return std::sqrt(acc);
    };
    double c_norm = weighted_norm(c);
    for (std::uint64_t k = 0; k < 100; ++k) {
        RewardTable probe = with_redistribution(
            apply_shaping(r, random_potential(3, 400 + k, 2.0), mdp), mdp, 500 + k, 1.0);
        CHECK(c_norm <= weighted_norm(probe) + 1e-9);
    }
}

TEST_CASE("minimal-L2 rejects weights that vanish on the support") {
    Mdp mdp = random_mdp(3, 2, 0.9, 140);
    Tensor3 weights(3, 2, 3, 1.0);
    weights(0, 0, 1) = 0.0; // softmax support covers everything
    CHECK_THROWS_AS(canon_minimal_l2(random_reward(3, 2, 141), mdp, weights), Error);
}

TEST_CASE("canon_none returns its input") {
    RewardTable r = random_reward(3, 2, 150);
    CHECK(sup_diff(canon_none(r), r) == 0.0);
}
