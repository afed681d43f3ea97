#include "rewardlab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rewardlab {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kReachMassTol = 1e-12;
constexpr double kQIterTol = 1e-10;
constexpr int kQIterCap = 100000;

Eigen::MatrixXd policy_transition_matrix(const Mdp& mdp, const Policy& pi) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            double pa = pi.prob(s, a, mdp.n_actions);
            if (pa == 0.0) continue;
            const double* row = mdp.transition.row(s, a);
            for (int s2 = 0; s2 < mdp.n_states; ++s2) P(s, s2) += pa * row[s2];
        }
    return P;
}

} // namespace

void validate_mdp(const Mdp& mdp) {
    if (mdp.n_states <= 0 || mdp.n_actions <= 0)
        throw Error(ErrorCode::ShapeMismatch, "state and action counts must be positive");
    if (!(mdp.gamma > 0.0 && mdp.gamma < 1.0))
        throw Error(ErrorCode::BadGamma,
                    "gamma must lie strictly inside (0,1), got " + std::to_string(mdp.gamma));
    if (!mdp.shape_matches(mdp.transition))
        throw Error(ErrorCode::ShapeMismatch, "transition tensor shape");
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            const double* row = mdp.transition.row(s, a);
            double sum = 0.0;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) {
                if (!(row[s2] >= 0.0) || !std::isfinite(row[s2]))
                    throw Error(ErrorCode::NonStochasticRow,
                                "negative or non-finite probability at (" +
                                    std::to_string(s) + "," + std::to_string(a) + ")");
                sum += row[s2];
            }
            if (std::abs(sum - 1.0) > kRowSumTol)
                throw Error(ErrorCode::NonStochasticRow,
                            "row (" + std::to_string(s) + "," + std::to_string(a) +
                                ") sums to " + std::to_string(sum));
        }
    if (static_cast<int>(mdp.mu0.size()) != mdp.n_states)
        throw Error(ErrorCode::BadInitialDistribution, "mu0 length");
    double mu_sum = 0.0;
    for (double p : mdp.mu0) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw Error(ErrorCode::BadInitialDistribution, "negative or non-finite mu0 entry");
        mu_sum += p;
    }
    if (std::abs(mu_sum - 1.0) > kRowSumTol)
        throw Error(ErrorCode::BadInitialDistribution,
                    "mu0 sums to " + std::to_string(mu_sum));

    // Reachability: every state must carry occupancy mass under the uniform
    // policy. States with no mass would make canonicalisations and regret
    // ill-posed, so we reject instead of silently dropping them.
    OccupancyMeasure occ = occupancy(mdp, Policy::uniform(mdp.n_states, mdp.n_actions));
    for (int s = 0; s < mdp.n_states; ++s) {
        double mass = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a)
            mass += occ.d[static_cast<std::size_t>(s) * mdp.n_actions + a];
        if (mass <= kReachMassTol)
            throw Error(ErrorCode::UnreachableState,
                        "state " + std::to_string(s) + " has no occupancy mass");
    }
}

void validate_policy(const Mdp& mdp, const Policy& pi) {
    if (pi.kind == Policy::Kind::Deterministic) {
        if (static_cast<int>(pi.det.size()) != mdp.n_states)
            throw Error(ErrorCode::ShapeMismatch, "deterministic policy length");
        for (int a : pi.det)
            if (a < 0 || a >= mdp.n_actions)
                throw Error(ErrorCode::ShapeMismatch, "action index out of range");
    } else {
        if (pi.stoch.size() !=
            static_cast<std::size_t>(mdp.n_states) * mdp.n_actions)
            throw Error(ErrorCode::ShapeMismatch, "stochastic policy shape");
        for (int s = 0; s < mdp.n_states; ++s) {
            double sum = 0.0;
            for (int a = 0; a < mdp.n_actions; ++a) {
                double p = pi.stoch[static_cast<std::size_t>(s) * mdp.n_actions + a];
                if (!(p >= 0.0))
                    throw Error(ErrorCode::ShapeMismatch, "negative policy probability");
                sum += p;
            }
            if (std::abs(sum - 1.0) > kRowSumTol)
                throw Error(ErrorCode::ShapeMismatch,
                            "policy row " + std::to_string(s) + " sums to " +
                                std::to_string(sum));
        }
    }
}

ValueVector policy_eval_V(const Mdp& mdp, const RewardTable& reward, const Policy& pi) {
    if (!mdp.shape_matches(reward))
        throw Error(ErrorCode::ShapeMismatch, "reward tensor shape");

    Eigen::VectorXd r_pi = Eigen::VectorXd::Zero(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            double pa = pi.prob(s, a, mdp.n_actions);
            if (pa == 0.0) continue;
            const double* tau = mdp.transition.row(s, a);
            const double* rew = reward.row(s, a);
            double exp_r = 0.0;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) exp_r += tau[s2] * rew[s2];
            r_pi(s) += pa * exp_r;
        }

    Eigen::MatrixXd P = policy_transition_matrix(mdp, pi);
    Eigen::MatrixXd A =
        Eigen::MatrixXd::Identity(mdp.n_states, mdp.n_states) - mdp.gamma * P;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Eigen::VectorXd V = lu.solve(r_pi);

    double residual = (A * V - r_pi).lpNorm<Eigen::Infinity>();
    double scale = 1.0 + V.lpNorm<Eigen::Infinity>();
    if (!V.allFinite() || residual > 1e-10 * scale)
        throw Error(ErrorCode::SolveFailure, "policy evaluation residual too large");
    return V;
}

double policy_return_J(const Mdp& mdp, const RewardTable& reward, const Policy& pi) {
    ValueVector V = policy_eval_V(mdp, reward, pi);
    double j = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) j += mdp.mu0[s] * V(s);
    return j;
}

std::vector<double> expected_reward_sa(const Mdp& mdp, const RewardTable& reward) {
    std::vector<double> rbar(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions, 0.0);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            const double* tau = mdp.transition.row(s, a);
            const double* rew = reward.row(s, a);
            double acc = 0.0;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) acc += tau[s2] * rew[s2];
            rbar[static_cast<std::size_t>(s) * mdp.n_actions + a] = acc;
        }
    return rbar;
}

Policy optimal_policy(const Mdp& mdp, const RewardTable& reward) {
    if (!mdp.shape_matches(reward))
        throw Error(ErrorCode::ShapeMismatch, "reward tensor shape");
    const int S = mdp.n_states, A = mdp.n_actions;
    std::vector<double> rbar = expected_reward_sa(mdp, reward);

    std::vector<double> Q(static_cast<std::size_t>(S) * A, 0.0);
    std::vector<double> Qnext(Q.size(), 0.0);
    std::vector<double> Vmax(S, 0.0);

    double change = 0.0;
    int iter = 0;
    for (; iter < kQIterCap; ++iter) {
        for (int s2 = 0; s2 < S; ++s2) {
            double best = Q[static_cast<std::size_t>(s2) * A];
            for (int a = 1; a < A; ++a)
                best = std::max(best, Q[static_cast<std::size_t>(s2) * A + a]);
            Vmax[s2] = best;
        }
        change = 0.0;
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                const double* tau = mdp.transition.row(s, a);
                double acc = 0.0;
                for (int s2 = 0; s2 < S; ++s2) acc += tau[s2] * Vmax[s2];
                double q = rbar[static_cast<std::size_t>(s) * A + a] + mdp.gamma * acc;
                change = std::max(change,
                                  std::abs(q - Q[static_cast<std::size_t>(s) * A + a]));
                Qnext[static_cast<std::size_t>(s) * A + a] = q;
            }
        Q.swap(Qnext);
        if (change < kQIterTol) break;
    }
    if (change >= kQIterTol)
        throw Error(ErrorCode::NonConvergence,
                    "Q-iteration residual " + std::to_string(change) + " after " +
                        std::to_string(kQIterCap) + " iterations");

    std::vector<int> actions(S, 0);
    for (int s = 0; s < S; ++s) {
        int best_a = 0;
        double best_q = Q[static_cast<std::size_t>(s) * A];
        for (int a = 1; a < A; ++a) {
            double q = Q[static_cast<std::size_t>(s) * A + a];
            if (q > best_q) { // strict: ties keep the lowest action index
                best_q = q;
                best_a = a;
            }
        }
        actions[s] = best_a;
    }
    return Policy::deterministic(std::move(actions));
}

Policy worst_policy(const Mdp& mdp, const RewardTable& reward) {
    RewardTable negated = reward;
    negated *= -1.0;
    return optimal_policy(mdp, negated);
}

OccupancyMeasure occupancy(const Mdp& mdp, const Policy& pi) {
    const int S = mdp.n_states, A = mdp.n_actions;
    // State occupancy rho solves rho = mu0 + gamma P_pi^T rho.
    Eigen::MatrixXd P = policy_transition_matrix(mdp, pi);
    Eigen::MatrixXd M =
        Eigen::MatrixXd::Identity(S, S) - mdp.gamma * P.transpose();
    Eigen::VectorXd mu = Eigen::Map<const Eigen::VectorXd>(mdp.mu0.data(), S);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    Eigen::VectorXd rho = lu.solve(mu);
    if (!rho.allFinite() ||
        (M * rho - mu).lpNorm<Eigen::Infinity>() > 1e-10 * (1.0 + rho.lpNorm<Eigen::Infinity>()))
        throw Error(ErrorCode::SolveFailure, "occupancy flow solve failed");

    OccupancyMeasure occ;
    occ.d.assign(static_cast<std::size_t>(S) * A, 0.0);
    occ.m = Tensor3(S, A, S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            double dsa = pi.prob(s, a, A) * rho(s);
            // Clamp the tiny negatives the linear solve can leave behind.
            if (dsa < 0.0 && dsa > -1e-12) dsa = 0.0;
            occ.d[static_cast<std::size_t>(s) * A + a] = dsa;
            const double* tau = mdp.transition.row(s, a);
            double* mrow = occ.m.row(s, a);
            for (int s2 = 0; s2 < S; ++s2) mrow[s2] = dsa * tau[s2];
        }
    return occ;
}

Trajectory simulate_trajectory(const Mdp& mdp, const Policy& pi, int start_state,
                               int horizon, Rng& rng) {
    if (horizon < 1) throw Error(ErrorCode::ShapeMismatch, "horizon must be >= 1");
    if (start_state < 0 || start_state >= mdp.n_states)
        throw Error(ErrorCode::ShapeMismatch, "start state out of range");
    Trajectory traj;
    traj.steps.reserve(horizon);
    int s = start_state;
    for (int t = 0; t < horizon; ++t) {
        int a;
        if (pi.kind == Policy::Kind::Deterministic) {
            a = pi.det[s];
        } else {
            a = rng.categorical_row(
                pi.stoch.data() + static_cast<std::size_t>(s) * mdp.n_actions,
                mdp.n_actions);
        }
        int s2 = rng.categorical_row(mdp.transition.row(s, a), mdp.n_states);
        traj.steps.push_back({s, a, s2});
        s = s2;
    }
    return traj;
}

double trajectory_return(const RewardTable& reward, const Trajectory& traj, double gamma) {
    double g = 0.0;
    double discount = 1.0;
    for (const auto& step : traj.steps) {
        g += discount * reward(step.state, step.action, step.next_state);
        discount *= gamma;
    }
    return g;
}

double simulate_return(const Mdp& mdp, const RewardTable& reward, const Policy& pi,
                       int start_state, int horizon, Rng& rng) {
    if (!mdp.shape_matches(reward))
        throw Error(ErrorCode::ShapeMismatch, "reward tensor shape");
    Trajectory traj = simulate_trajectory(mdp, pi, start_state, horizon, rng);
    return trajectory_return(reward, traj, mdp.gamma);
}

int horizon_for_cutoff(double gamma, double cutoff) {
    int t = 0;
    double g = 1.0;
    while (g >= cutoff) {
        g *= gamma;
        ++t;
        if (t > 10000000)
            throw Error(ErrorCode::NonConvergence, "horizon cutoff never reached");
    }
    return t;
}

} // namespace rewardlab
