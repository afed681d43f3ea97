#include "rewardlab/regret.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rewardlab/gen.hpp"
#include "rewardlab/metrics.hpp"
#include "rewardlab/simplex.hpp"

namespace rewardlab {

namespace {

constexpr double kRolloutCutoff = 1e-5;
constexpr double kZeroDenomTol = 1e-9;

/// Return estimates for one policy under both rewards, from one episode per
/// start state weighted by mu0. The same trajectories serve both rewards.
struct ReturnPair {
    double j1 = 0.0;
    double j2 = 0.0;
};

ReturnPair rollout_returns(const Mdp& mdp, const RewardTable& r1, const RewardTable& r2,
                           const Policy& pi, int horizon, std::uint64_t seed) {
    ReturnPair out;
    for (int s = 0; s < mdp.n_states; ++s) {
        if (mdp.mu0[s] == 0.0) continue;
        Rng rng(hash64({seed, static_cast<std::uint64_t>(s)}));
        Trajectory traj = simulate_trajectory(mdp, pi, s, horizon, rng);
        out.j1 += mdp.mu0[s] * trajectory_return(r1, traj, mdp.gamma);
        out.j2 += mdp.mu0[s] * trajectory_return(r2, traj, mdp.gamma);
    }
    return out;
}

double regret_component(double j_best, double j_other, double j_worst) {
    double num = j_best - j_other;
    double den = j_best - j_worst;
    double scale = 1.0 + std::abs(j_best) + std::abs(j_worst);
    if (std::abs(den) <= kZeroDenomTol * scale) den = 1.0;
    return std::clamp(num / den, 0.0, 1.0);
}

} // namespace

RegretReport pair_regret_with_policies(const Mdp& mdp, const RewardTable& r1,
                                       const RewardTable& r2, const Policy& pi_1,
                                       const Policy& pi_x, RegretMode mode,
                                       std::uint64_t seed) {
    RegretReport rep;
    rep.pi_1 = pi_1;
    rep.pi_x = pi_x;
    rep.pi_2 = optimal_policy(mdp, r2);
    rep.pi_y = worst_policy(mdp, r2);

    double j1_pi1, j1_pi2, j1_pix, j2_pi2, j2_pi1, j2_piy;
    if (mode == RegretMode::Exact) {
        j1_pi1 = policy_return_J(mdp, r1, rep.pi_1);
        j1_pi2 = policy_return_J(mdp, r1, rep.pi_2);
        j1_pix = policy_return_J(mdp, r1, rep.pi_x);
        j2_pi2 = policy_return_J(mdp, r2, rep.pi_2);
        j2_pi1 = policy_return_J(mdp, r2, rep.pi_1);
        j2_piy = policy_return_J(mdp, r2, rep.pi_y);
    } else {
        int horizon = horizon_for_cutoff(mdp.gamma, kRolloutCutoff);
        // Common random numbers: every policy replays the same per-start
        // stream, so the return differences the regret ratios are built from
        // share their noise.
        ReturnPair g1 = rollout_returns(mdp, r1, r2, rep.pi_1, horizon, seed);
        ReturnPair g2 = rollout_returns(mdp, r1, r2, rep.pi_2, horizon, seed);
        ReturnPair gx = rollout_returns(mdp, r1, r2, rep.pi_x, horizon, seed);
        ReturnPair gy = rollout_returns(mdp, r1, r2, rep.pi_y, horizon, seed);
        j1_pi1 = g1.j1;
        j1_pi2 = g2.j1;
        j1_pix = gx.j1;
        j2_pi2 = g2.j2;
        j2_pi1 = g1.j2;
        j2_piy = gy.j2;
    }

    rep.reg_forward = regret_component(j1_pi1, j1_pi2, j1_pix);
    rep.reg_backward = regret_component(j2_pi2, j2_pi1, j2_piy);
    rep.regret = 0.5 * (rep.reg_forward + rep.reg_backward);
    return rep;
}

RegretReport optimal_pair_regret(const Mdp& mdp, const RewardTable& r1,
                                 const RewardTable& r2, RegretMode mode,
                                 std::uint64_t seed) {
    return pair_regret_with_policies(mdp, r1, r2, optimal_policy(mdp, r1),
                                     worst_policy(mdp, r1), mode, seed);
}

double worst_case_regret(const Mdp& mdp, const RewardTable& r1, const RewardTable& r2) {
    const int S = mdp.n_states, A = mdp.n_actions;
    if (S * A > 64)
        throw Error(ErrorCode::InstanceTooLarge, "worst_case_regret LP limit is 64 state-actions");
    if (!mdp.shape_matches(r1) || !mdp.shape_matches(r2))
        throw Error(ErrorCode::ShapeMismatch, "worst_case_regret");

    double jrange = norm_eval(NormId::Jrange, r1, mdp);
    if (jrange <= 1e-12 * (1.0 + r1.max_abs())) return 0.0;

    std::vector<double> rbar1 = expected_reward_sa(mdp, r1);
    std::vector<double> rbar2 = expected_reward_sa(mdp, r2);

    // Variables: d1 (S*A), d2 (S*A), one slack for the coupling row.
    // Flow rows per block: sum_a d[u,a] - gamma sum_{s,a} d[s,a] tau(s,a,u) = mu0[u].
    // Coupling: d2.rbar2 - d1.rbar2 - slack = 0.
    const int nsa = S * A;
    const int n = 2 * nsa + 1;
    const int m = 2 * S + 1;
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(m, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int block = 0; block < 2; ++block) {
        int var0 = block * nsa;
        int row0 = block * S;
        for (int u = 0; u < S; ++u) {
            rhs(row0 + u) = mdp.mu0[u];
            for (int a = 0; a < A; ++a) lhs(row0 + u, var0 + u * A + a) += 1.0;
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a)
                    lhs(row0 + u, var0 + s * A + a) -= mdp.gamma * mdp.transition(s, a, u);
        }
    }
    for (int i = 0; i < nsa; ++i) {
        lhs(2 * S, i) = -rbar2[i];
        lhs(2 * S, nsa + i) = rbar2[i];
    }
    lhs(2 * S, 2 * nsa) = -1.0;

    Eigen::VectorXd obj = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < nsa; ++i) {
        obj(i) = rbar1[i];
        obj(nsa + i) = -rbar1[i];
    }

    LpSolution sol = solve_lp_max(lhs, rhs, obj);
    return std::clamp(sol.value / jrange, 0.0, 1.0);
}

bool policy_order_equal(const Mdp& mdp, const RewardTable& r1, const RewardTable& r2) {
    const int S = mdp.n_states, A = mdp.n_actions;
    if (S > 4 || A > 3)
        throw Error(ErrorCode::InstanceTooLarge, "policy order oracle limit is 4 states, 3 actions");

    std::vector<Policy> policies;
    long n_det = 1;
    for (int s = 0; s < S; ++s) n_det *= A;
    for (long code = 0; code < n_det; ++code) {
        std::vector<int> actions(S);
        long rest = code;
        for (int s = 0; s < S; ++s) {
            actions[s] = static_cast<int>(rest % A);
            rest /= A;
        }
        policies.push_back(Policy::deterministic(std::move(actions)));
    }
    Rng rng(hash64({0x9D1CE5A2F0B47C31ULL}));
    for (int k = 0; k < 200; ++k) {
        std::vector<double> rows(static_cast<std::size_t>(S) * A);
        for (int s = 0; s < S; ++s) {
            double total = 0.0;
            for (int a = 0; a < A; ++a) {
                double w = -std::log(1.0 - rng.uniform());
                rows[static_cast<std::size_t>(s) * A + a] = w;
                total += w;
            }
            for (int a = 0; a < A; ++a) rows[static_cast<std::size_t>(s) * A + a] /= total;
        }
        policies.push_back(Policy::stochastic(S, A, std::move(rows)));
    }

    std::vector<double> j1(policies.size()), j2(policies.size());
    for (std::size_t i = 0; i < policies.size(); ++i) {
        // One occupancy solve serves both rewards.
        OccupancyMeasure occ = occupancy(mdp, policies[i]);
        j1[i] = dot(occ.m, r1);
        j2[i] = dot(occ.m, r2);
    }

    // Orderings are invariant under positive scaling, so compare return
    // differences normalised by each reward's return range. This keeps the
    // tie tolerance meaningful when the two rewards live on very different
    // scales. A reward whose range is negligible ties every policy pair.
    constexpr double kTieTol = 1e-9;
    auto classify = [&](const std::vector<double>& j, const RewardTable& r) {
        auto [lo, hi] = std::minmax_element(j.begin(), j.end());
        double range = *hi - *lo;
        bool trivial = range <= kTieTol * (1.0 + r.max_abs());
        return std::pair<double, bool>(range, trivial);
    };
    auto [range1, trivial1] = classify(j1, r1);
    auto [range2, trivial2] = classify(j2, r2);
    if (trivial1 || trivial2) return trivial1 && trivial2;

    for (std::size_t i = 0; i < policies.size(); ++i)
        for (std::size_t j = i + 1; j < policies.size(); ++j) {
            double d1 = (j1[i] - j1[j]) / range1;
            double d2 = (j2[i] - j2[j]) / range2;
            int c1 = std::abs(d1) <= kTieTol ? 0 : (d1 > 0 ? 1 : -1);
            int c2 = std::abs(d2) <= kTieTol ? 0 : (d2 > 0 ? 1 : -1);
            if (c1 != c2) return false;
        }
    return true;
}

CounterexamplePair make_successor_swap_pair(int n_states, int n_actions, double epsilon) {
    if (n_states < 2 || n_actions < 2)
        throw Error(ErrorCode::ShapeMismatch, "need at least 2 states and 2 actions");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw Error(ErrorCode::BadEpsilon, "epsilon must lie in (0,1)");

    CounterexamplePair pair;
    pair.family = CounterexamplePair::Family::SuccessorSwap;
    pair.parameter = epsilon;
    pair.r1 = RewardTable(n_states, n_actions, n_states);
    pair.r2 = RewardTable(n_states, n_actions, n_states);
    pair.r1(0, 0, 0) = 1.0;
    pair.r1(0, 0, 1) = epsilon;
    pair.r2(0, 0, 0) = epsilon;
    pair.r2(0, 0, 1) = 1.0;

    GenConfig cfg;
    cfg.n_states = n_states;
    cfg.n_actions = n_actions;
    cfg.gamma = 0.95;
    pair.mdp = gen_mdp(cfg, hash64({0xC0117E57ULL, static_cast<std::uint64_t>(n_states),
                                    static_cast<std::uint64_t>(n_actions)}));

    if (n_states <= 4 && n_actions <= 3 &&
        !policy_order_equal(pair.mdp, pair.r1, pair.r2))
        throw Error(ErrorCode::SolveFailure, "successor-swap pair failed its order check");
    DistributionPair dists = DistributionPair::uniform(n_states, n_actions);
    if (!(epic_distance(pair.r1, pair.r2, pair.mdp.gamma, dists) > 0.0))
        throw Error(ErrorCode::SolveFailure, "successor-swap pair failed its EPIC check");
    return pair;
}

CounterexamplePair make_offsupport_inflation_pair(const Mdp& mdp, double epsilon,
                                                  double inflation) {
    if (!(epsilon > 0.0)) throw Error(ErrorCode::BadEpsilon, "epsilon must be positive");
    if (!(inflation >= 0.0)) throw Error(ErrorCode::BadEpsilon, "inflation must be >= 0");
    if (mdp.n_actions < 2)
        throw Error(ErrorCode::ShapeMismatch, "need at least 2 actions");
    const int S = mdp.n_states, A = mdp.n_actions;

    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const double* row = mdp.transition.row(s, a);
            int ones = 0;
            for (int s2 = 0; s2 < S; ++s2) {
                if (std::abs(row[s2] - 1.0) <= 1e-12) ++ones;
                else if (!(std::abs(row[s2]) <= 1e-12))
                    throw Error(ErrorCode::NotDeterministicTau,
                                "transition row is not deterministic");
            }
            if (ones != 1)
                throw Error(ErrorCode::NotDeterministicTau,
                            "transition row is not deterministic");
        }

    // r rewards every reachable action-0 transition; u covers exactly the
    // impossible transitions.
    RewardTable direction(S, A, S);
    RewardTable off_support(S, A, S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const double* row = mdp.transition.row(s, a);
            for (int s2 = 0; s2 < S; ++s2) {
                if (row[s2] > 0.5) {
                    if (a == 0) direction(s, a, s2) = 1.0;
                } else {
                    off_support(s, a, s2) = 1.0;
                }
            }
        }

    CounterexamplePair pair;
    pair.family = CounterexamplePair::Family::OffSupportInflation;
    pair.parameter = inflation;
    pair.mdp = mdp;
    pair.r1 = epsilon * direction + inflation * off_support;
    pair.r2 = (-epsilon) * direction + inflation * off_support;

    if (S * A <= 64) {
        double reg = worst_case_regret(mdp, pair.r1, pair.r2);
        if (std::abs(reg - 1.0) > 1e-6)
            throw Error(ErrorCode::SolveFailure,
                        "off-support pair regret " + std::to_string(reg) + " != 1");
    }
    return pair;
}

CounterexamplePair make_dard_cycle_pair() {
    const int S = 3, A = 2;
    Mdp mdp;
    mdp.n_states = S;
    mdp.n_actions = A;
    mdp.gamma = 0.9;
    mdp.mu0 = {1.0, 0.0, 0.0};
    mdp.transition = Tensor3(S, A, S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) mdp.transition(s, a, (s + 1) % S) = 1.0;

    CounterexamplePair pair;
    pair.family = CounterexamplePair::Family::DardCycle;
    pair.parameter = 0.0;
    pair.mdp = mdp;
    pair.r1 = RewardTable(S, A, S);
    pair.r2 = RewardTable(S, A, S);
    for (int s = 0; s < S; ++s)
        for (int s2 = 0; s2 < S; ++s2) {
            if (s2 == (s + 1) % S) continue; // possible transition: reward 0
            pair.r1(s, 0, s2) = 1.0;
            pair.r2(s, 1, s2) = 1.0;
        }

    DistributionPair dists = DistributionPair::uniform(S, A);
    if (!(dard_distance(pair.r1, pair.r2, mdp, dists) > 0.0))
        throw Error(ErrorCode::SolveFailure, "cycle pair failed its DARD check");
    if (!policy_order_equal(mdp, pair.r1, pair.r2))
        throw Error(ErrorCode::SolveFailure, "cycle pair failed its order check");
    MetricSpec val22 = parse_metric_spec("VAL-2-2");
    if (!(starc_distance(val22, pair.r1, pair.r2, mdp, dists) <= 1e-10))
        throw Error(ErrorCode::SolveFailure, "cycle pair failed its VAL check");
    return pair;
}

} // namespace rewardlab
