#include <doctest.h>

#include <cmath>
#include <functional>

#include "rewardlab/mdp.hpp"
#include "test_util.hpp"

using namespace rewardlab;
using namespace testutil;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::IoError;
}

} // namespace

TEST_CASE("validate_mdp accepts a well-formed MDP") {
    Mdp mdp = random_mdp(2, 2, 0.9, 11);
    CHECK_NOTHROW(validate_mdp(mdp));
}

TEST_CASE("validate_mdp rejects a non-stochastic row") {
    Mdp mdp = random_mdp(2, 2, 0.9, 11);
    mdp.transition(0, 0, 0) = 0.5;
    mdp.transition(0, 0, 1) = 0.4;
    CHECK(code_of([&] { validate_mdp(mdp); }) == ErrorCode::NonStochasticRow);
}

TEST_CASE("validate_mdp rejects gamma on the boundary") {
    Mdp mdp = random_mdp(2, 2, 0.9, 11);
    mdp.gamma = 1.0;
    CHECK(code_of([&] { validate_mdp(mdp); }) == ErrorCode::BadGamma);
    mdp.gamma = 0.0;
    CHECK(code_of([&] { validate_mdp(mdp); }) == ErrorCode::BadGamma);
}

TEST_CASE("validate_mdp rejects a bad initial distribution") {
    Mdp mdp = random_mdp(2, 2, 0.9, 11);
    mdp.mu0 = {0.7, 0.7};
    CHECK(code_of([&] { validate_mdp(mdp); }) == ErrorCode::BadInitialDistribution);
}

TEST_CASE("validate_mdp rejects an unreachable state") {
    // State 2 is never entered and gets no initial mass.
    Mdp mdp;
    mdp.n_states = 3;
    mdp.n_actions = 1;
    mdp.gamma = 0.9;
    mdp.mu0 = {1.0, 0.0, 0.0};
    mdp.transition = Tensor3(3, 1, 3);
    mdp.transition(0, 0, 1) = 1.0;
    mdp.transition(1, 0, 0) = 1.0;
    mdp.transition(2, 0, 0) = 1.0;
    CHECK(code_of([&] { validate_mdp(mdp); }) == ErrorCode::UnreachableState);
}

TEST_CASE("policy evaluation of a constant reward is the geometric series") {
    Mdp mdp = random_mdp(4, 2, 0.9, 3);
    Policy pi = random_stochastic_policy(4, 2, 5);
    ValueVector v = policy_eval_V(mdp, constant_reward(4, 2, 2.5), pi);
    for (int s = 0; s < 4; ++s) CHECK(v(s) == doctest::Approx(2.5 / 0.1).epsilon(1e-12));
    ValueVector z = policy_eval_V(mdp, constant_reward(4, 2, 0.0), pi);
    for (int s = 0; s < 4; ++s) CHECK(z(s) == 0.0);
}

TEST_CASE("policy evaluation matches a hand linear solve on the 2-state cycle") {
    const double gamma = 0.9;
    Mdp mdp = two_state_cycle(gamma);
    RewardTable r(2, 1, 2);
    r(0, 0, 1) = 2.0;
    r(1, 0, 0) = -1.0;
    Policy pi = Policy::deterministic({0, 0});

    // Independent oracle: (I - gamma P) V = r_pi by the closed-form 2x2
    // inverse; r_pi = (2, -1), P swaps the two states.
    double r0 = 2.0, r1 = -1.0;
    double det = 1.0 - gamma * gamma;
    double v0 = (r0 + gamma * r1) / det;
    double v1 = (r1 + gamma * r0) / det;

    ValueVector v = policy_eval_V(mdp, r, pi);
    CHECK(v(0) == doctest::Approx(v0).epsilon(1e-12));
    CHECK(v(1) == doctest::Approx(v1).epsilon(1e-12));
}

TEST_CASE("policy evaluation residual stays within its bound") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Mdp mdp = random_mdp(16, 3, 0.95, seed);
        RewardTable r = random_reward(16, 3, seed + 100, 5.0);
        Policy pi = random_stochastic_policy(16, 3, seed + 200);
        ValueVector v = policy_eval_V(mdp, r, pi);

        Eigen::VectorXd residual = Eigen::VectorXd::Zero(16);
        for (int s = 0; s < 16; ++s) {
            double acc = 0.0;
            for (int a = 0; a < 3; ++a) {
                double pa = pi.prob(s, a, 3);
                for (int s2 = 0; s2 < 16; ++s2)
                    acc += pa * mdp.transition(s, a, s2) *
                           (r(s, a, s2) + mdp.gamma * v(s2));
            }
            residual(s) = v(s) - acc;
        }
        CHECK(residual.lpNorm<Eigen::Infinity>() <=
              1e-10 * (1.0 + v.lpNorm<Eigen::Infinity>()));
    }
}

TEST_CASE("policy return of simple rewards") {
    Mdp mdp = random_mdp(3, 2, 0.8, 17);
    Policy pi = random_stochastic_policy(3, 2, 18);
    CHECK(policy_return_J(mdp, constant_reward(3, 2, 0.0), pi) == 0.0);
    CHECK(policy_return_J(mdp, constant_reward(3, 2, 1.0), pi) ==
          doctest::Approx(1.0 / 0.2).epsilon(1e-12));
}

TEST_CASE("policy return equals occupancy dotted with the reward") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Mdp mdp = random_mdp(3, 2, 0.9, seed);
        RewardTable r = random_reward(3, 2, seed + 50, 3.0);
        Policy pi = random_stochastic_policy(3, 2, seed + 90);
        double j = policy_return_J(mdp, r, pi);
        double j_occ = dot(occupancy(mdp, pi).m, r);
        CHECK(std::abs(j - j_occ) <= 1e-8 * (1.0 + std::abs(j)));
    }
}

TEST_CASE("optimal policy ties break toward the lowest action") {
    Mdp mdp = random_mdp(3, 2, 0.9, 23);
    Policy pi = optimal_policy(mdp, constant_reward(3, 2, 0.0));
    for (int s = 0; s < 3; ++s) CHECK(pi.det[s] == 0);
}

TEST_CASE("optimal policy picks a uniformly dominant action") {
    Mdp mdp = random_mdp(4, 3, 0.9, 29);
    RewardTable r(4, 3, 4);
    for (int s = 0; s < 4; ++s)
        for (int s2 = 0; s2 < 4; ++s2) r(s, 1, s2) = 1.0;
    Policy pi = optimal_policy(mdp, r);
    for (int s = 0; s < 4; ++s) CHECK(pi.det[s] == 1);
}

TEST_CASE("optimal and worst policies match exhaustive enumeration") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        Mdp mdp = random_mdp(3, 2, 0.9, seed * 7 + 1);
        RewardTable r = random_reward(3, 2, seed + 500, 2.0);
        double j_best = policy_return_J(mdp, r, optimal_policy(mdp, r));
        double j_worst = policy_return_J(mdp, r, worst_policy(mdp, r));
        for (const Policy& pi : all_deterministic_policies(3, 2)) {
            double j = policy_return_J(mdp, r, pi);
            CHECK(j_best >= j - 1e-6);
            CHECK(j_worst <= j + 1e-6);
        }
    }
}

TEST_CASE("worst policy is the optimal policy of the negated reward") {
    Mdp mdp = random_mdp(4, 2, 0.9, 31);
    RewardTable r = random_reward(4, 2, 77, 2.0);
    RewardTable neg = r;
    neg *= -1.0;
    Policy w = worst_policy(mdp, r);
    Policy best_neg = optimal_policy(mdp, neg);
    CHECK(w.det == best_neg.det);
}

TEST_CASE("occupancy mass is 1/(1-gamma)") {
    Mdp single;
    single.n_states = 1;
    single.n_actions = 2;
    single.gamma = 0.7;
    single.mu0 = {1.0};
    single.transition = Tensor3(1, 2, 1, 1.0);
    Policy pi = random_stochastic_policy(1, 2, 3);
    CHECK(occupancy(single, pi).total_mass() ==
          doctest::Approx(1.0 / 0.3).epsilon(1e-12));
}

TEST_CASE("occupancy of the deterministic cycle matches a truncated power series") {
    const double gamma = 0.9;
    Mdp mdp = two_state_cycle(gamma);
    Policy pi = Policy::deterministic({0, 0});
    OccupancyMeasure occ = occupancy(mdp, pi);

    // Independent oracle: roll the deterministic chain out 500 steps.
    double m01 = 0.0, m10 = 0.0;
    double discount = 1.0;
    int state = 0;
    for (int t = 0; t < 500; ++t) {
        if (state == 0)
            m01 += discount;
        else
            m10 += discount;
        state = 1 - state;
        discount *= gamma;
    }
    CHECK(occ.m(0, 0, 1) == doctest::Approx(m01).epsilon(1e-10));
    CHECK(occ.m(1, 0, 0) == doctest::Approx(m10).epsilon(1e-10));
    CHECK(occ.m(0, 0, 0) == 0.0);
    CHECK(occ.m(1, 0, 1) == 0.0);
}

TEST_CASE("occupancy satisfies the flow constraint") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Mdp mdp = random_mdp(5, 2, 0.85, seed + 40);
        Policy pi = random_stochastic_policy(5, 2, seed + 41);
        OccupancyMeasure occ = occupancy(mdp, pi);
        CHECK(std::abs(occ.total_mass() - 1.0 / 0.15) <= 1e-8);
        for (int s = 0; s < 5; ++s) {
            double out_mass = 0.0;
            for (int a = 0; a < 2; ++a) out_mass += occ.d[s * 2 + a];
            double in_mass = mdp.mu0[s];
            for (int s2 = 0; s2 < 5; ++s2)
                for (int a2 = 0; a2 < 2; ++a2)
                    in_mass += mdp.gamma * occ.d[s2 * 2 + a2] * mdp.transition(s2, a2, s);
            CHECK(std::abs(out_mass - in_mass) <= 1e-8);
        }
    }
}

TEST_CASE("simulated return of a constant reward is the truncated geometric sum") {
    Mdp mdp = random_mdp(4, 2, 0.9, 51);
    Policy pi = random_stochastic_policy(4, 2, 52);
    const int horizon = 37;
    Rng rng(99);
    double g = simulate_return(mdp, constant_reward(4, 2, 1.0), pi, 0, horizon, rng);
    double expected = 0.0, discount = 1.0;
    for (int t = 0; t < horizon; ++t) {
        expected += discount;
        discount *= 0.9;
    }
    CHECK(g == expected);
}

TEST_CASE("simulated return along a deterministic path is the closed-form sum") {
    Mdp mdp = two_state_cycle(0.8);
    RewardTable r(2, 1, 2);
    r(0, 0, 1) = 3.0;
    r(1, 0, 0) = -2.0;
    Policy pi = Policy::deterministic({0, 0});
    Rng rng(1);
    double g = simulate_return(mdp, r, pi, 0, 6, rng);
    double expected = 0.0, discount = 1.0;
    for (int t = 0; t < 6; ++t) {
        expected += discount * (t % 2 == 0 ? 3.0 : -2.0);
        discount *= 0.8;
    }
    CHECK(g == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("simulation is deterministic given the seed") {
    Mdp mdp = random_mdp(6, 3, 0.9, 60);
    RewardTable r = random_reward(6, 3, 61, 2.0);
    Policy pi = random_stochastic_policy(6, 3, 62);
    Rng a(1234), b(1234);
    CHECK(simulate_return(mdp, r, pi, 2, 50, a) == simulate_return(mdp, r, pi, 2, 50, b));
}

TEST_CASE("averaged simulations approach the exact value function") {
    Mdp mdp = random_mdp(4, 2, 0.9, 71);
    RewardTable r = random_reward(4, 2, 72, 1.0);
    Policy pi = random_stochastic_policy(4, 2, 73);
    const int start = 1;
    const int n_sims = 10000;
    int horizon = horizon_for_cutoff(mdp.gamma, 1e-8);

    double exact = policy_eval_V(mdp, r, pi)(start);
    double sum = 0.0, sum_sq = 0.0;
    Rng rng(777);
    for (int k = 0; k < n_sims; ++k) {
        double g = simulate_return(mdp, r, pi, start, horizon, rng);
        sum += g;
        sum_sq += g * g;
    }
    double mean = sum / n_sims;
    double var = (sum_sq - sum * sum / n_sims) / (n_sims - 1);
    double se = std::sqrt(var / n_sims);
    CHECK(std::abs(mean - exact) <= 3.0 * se + 1e-7);
}

TEST_CASE("trajectory steps chain together") {
    Mdp mdp = random_mdp(5, 2, 0.9, 81);
    Policy pi = random_stochastic_policy(5, 2, 82);
    Rng rng(83);
    Trajectory traj = simulate_trajectory(mdp, pi, 3, 40, rng);
    REQUIRE(traj.steps.size() == 40);
    CHECK(traj.steps.front().state == 3);
    for (std::size_t t = 0; t + 1 < traj.steps.size(); ++t)
        CHECK(traj.steps[t].next_state == traj.steps[t + 1].state);
}

TEST_CASE("rollout horizon cutoff") {
    CHECK(horizon_for_cutoff(0.95, 1e-5) == 225);
    CHECK(horizon_for_cutoff(0.5, 0.25) == 3);
}

TEST_CASE("policy validation") {
    Mdp mdp = random_mdp(3, 2, 0.9, 91);
    CHECK_NOTHROW(validate_policy(mdp, Policy::deterministic({0, 1, 0})));
    CHECK_THROWS_AS(validate_policy(mdp, Policy::deterministic({0, 2, 0})), Error);
    CHECK_THROWS_AS(validate_policy(mdp, Policy::deterministic({0, 1})), Error);
    CHECK_NOTHROW(validate_policy(mdp, Policy::uniform(3, 2)));
    Policy bad = Policy::stochastic(3, 2, {0.5, 0.4, 0.5, 0.5, 0.5, 0.5});
    CHECK_THROWS_AS(validate_policy(mdp, bad), Error);
}
