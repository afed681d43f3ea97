#include "rewardlab/canon.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

namespace rewardlab {

const char* canon_id_name(CanonId id) {
    switch (id) {
        case CanonId::None: return "None";
        case CanonId::EPIC: return "EPIC";
        case CanonId::DARD: return "DARD";
        case CanonId::MinimalPotential: return "MinimalPotential";
        case CanonId::VALPotential: return "VALPotential";
        case CanonId::VAL: return "VAL";
        case CanonId::MinimalL2: return "MinimalL2";
    }
    return "?";
}

CanonId parse_canon_id(const std::string& text) {
    if (text == "None") return CanonId::None;
    if (text == "EPIC") return CanonId::EPIC;
    if (text == "DARD") return CanonId::DARD;
    if (text == "MinimalPotential") return CanonId::MinimalPotential;
    if (text == "VALPotential") return CanonId::VALPotential;
    if (text == "VAL") return CanonId::VAL;
    if (text == "MinimalL2") return CanonId::MinimalL2;
    throw Error(ErrorCode::UnknownCanon, "'" + text + "'");
}

RewardTable apply_shaping(const RewardTable& reward, const PotentialVector& phi,
                          const Mdp& mdp) {
    if (!mdp.shape_matches(reward) ||
        static_cast<int>(phi.size()) != mdp.n_states)
        throw Error(ErrorCode::ShapeMismatch, "apply_shaping");
    RewardTable out = reward;
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            double* row = out.row(s, a);
            for (int s2 = 0; s2 < mdp.n_states; ++s2)
                row[s2] += mdp.gamma * phi[s2] - phi[s];
        }
    return out;
}

RewardTable canon_val(const RewardTable& reward, const Mdp& mdp, const Policy& pi) {
    if (!mdp.shape_matches(reward))
        throw Error(ErrorCode::ShapeMismatch, "canon_val");
    ValueVector V = policy_eval_V(mdp, reward, pi);
    RewardTable out(mdp.n_states, mdp.n_actions, mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            const double* tau = mdp.transition.row(s, a);
            const double* rew = reward.row(s, a);
            double acc = 0.0;
            for (int x = 0; x < mdp.n_states; ++x)
                acc += tau[x] * (rew[x] + mdp.gamma * V(x));
            double level = acc - V(s);
            double* row = out.row(s, a);
            for (int s2 = 0; s2 < mdp.n_states; ++s2) row[s2] = level;
        }
    return out;
}

RewardTable canon_val(const RewardTable& reward, const Mdp& mdp) {
    return canon_val(reward, mdp, Policy::uniform(mdp.n_states, mdp.n_actions));
}

RewardTable canon_val_potential(const RewardTable& reward, const Mdp& mdp,
                                const Policy& pi) {
    if (!mdp.shape_matches(reward))
        throw Error(ErrorCode::ShapeMismatch, "canon_val_potential");
    ValueVector V = policy_eval_V(mdp, reward, pi);
    RewardTable out = reward;
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            double* row = out.row(s, a);
            for (int s2 = 0; s2 < mdp.n_states; ++s2)
                row[s2] += -V(s) + mdp.gamma * V(s2);
        }
    return out;
}

RewardTable canon_val_potential(const RewardTable& reward, const Mdp& mdp) {
    return canon_val_potential(reward, mdp,
                               Policy::uniform(mdp.n_states, mdp.n_actions));
}

RewardTable canon_epic(const RewardTable& reward, double gamma,
                       const std::vector<double>& dist_s,
                       const std::vector<double>& dist_a) {
    const int S = reward.dim_s, A = reward.dim_a;
    if (reward.dim_s2 != S || static_cast<int>(dist_s.size()) != S ||
        static_cast<int>(dist_a.size()) != A)
        throw Error(ErrorCode::ShapeMismatch, "canon_epic");
    for (double p : dist_s)
        if (!(p > 0.0)) throw Error(ErrorCode::ZeroSupport, "state distribution");
    for (double p : dist_a)
        if (!(p > 0.0)) throw Error(ErrorCode::ZeroSupport, "action distribution");

    // mean_next[u] = E[R(u, A, X)] with A ~ dist_a, X ~ dist_s.
    std::vector<double> mean_next(S, 0.0);
    for (int u = 0; u < S; ++u) {
        double acc = 0.0;
        for (int a = 0; a < A; ++a) {
            const double* row = reward.row(u, a);
            double inner = 0.0;
            for (int x = 0; x < S; ++x) inner += dist_s[x] * row[x];
            acc += dist_a[a] * inner;
        }
        mean_next[u] = acc;
    }
    double grand = 0.0;
    for (int u = 0; u < S; ++u) grand += dist_s[u] * mean_next[u];

    RewardTable out = reward;
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            double* row = out.row(s, a);
            for (int s2 = 0; s2 < S; ++s2)
                row[s2] += gamma * mean_next[s2] - mean_next[s] - gamma * grand;
        }
    return out;
}

RewardTable canon_dard(const RewardTable& reward, const Mdp& mdp,
                       const std::vector<double>& dist_a) {
    if (!mdp.shape_matches(reward))
        throw Error(ErrorCode::ShapeMismatch, "canon_dard");
    const int S = mdp.n_states, A = mdp.n_actions;
    if (static_cast<int>(dist_a.size()) != A)
        throw Error(ErrorCode::ShapeMismatch, "canon_dard action distribution");
    for (double p : dist_a)
        if (!(p > 0.0)) throw Error(ErrorCode::ZeroSupport, "action distribution");

    // cond_mean[u][b] = E_{X ~ tau(u,b)}[R(u, b, X)]
    std::vector<double> cond_mean(static_cast<std::size_t>(S) * A, 0.0);
    for (int u = 0; u < S; ++u)
        for (int b = 0; b < A; ++b) {
            const double* tau = mdp.transition.row(u, b);
            const double* rew = reward.row(u, b);
            double acc = 0.0;
            for (int x = 0; x < S; ++x) acc += tau[x] * rew[x];
            cond_mean[static_cast<std::size_t>(u) * A + b] = acc;
        }

    // inner[x][b][t] = E_{Y ~ tau(t,b)}[R(x, b, Y)] -- the double expectation
    // splits as X ~ tau(s,b) and Y ~ tau(s',b), independent given b.
    Tensor3 inner(S, A, S);
    for (int x = 0; x < S; ++x)
        for (int b = 0; b < A; ++b) {
            const double* rew = reward.row(x, b);
            for (int t = 0; t < S; ++t) {
                const double* tau_t = mdp.transition.row(t, b);
                double acc = 0.0;
                for (int y = 0; y < S; ++y) acc += tau_t[y] * rew[y];
                inner(x, b, t) = acc;
            }
        }

    // third[s][b][t] = E_{X ~ tau(s,b), Y ~ tau(t,b)}[R(X, b, Y)]
    Tensor3 third(S, A, S);
    for (int s = 0; s < S; ++s)
        for (int b = 0; b < A; ++b) {
            const double* tau_s = mdp.transition.row(s, b);
            for (int t = 0; t < S; ++t) {
                double acc = 0.0;
                for (int x = 0; x < S; ++x) acc += tau_s[x] * inner(x, b, t);
                third(s, b, t) = acc;
            }
        }

    RewardTable out = reward;
    for (int s = 0; s < S; ++s) {
        for (int s2 = 0; s2 < S; ++s2) {
            double adjust = 0.0;
            for (int b = 0; b < A; ++b)
                adjust += dist_a[b] *
                          (mdp.gamma * cond_mean[static_cast<std::size_t>(s2) * A + b] -
                           cond_mean[static_cast<std::size_t>(s) * A + b] -
                           mdp.gamma * third(s, b, s2));
            for (int a = 0; a < A; ++a) out(s, a, s2) += adjust;
        }
    }
    return out;
}

namespace {

/// Weight per transition coordinate for the potential optimisation:
/// 1 everywhere for plain norms, tau for the tau-weighted ones.
std::vector<double> potential_weights(const Mdp& mdp, PotentialNorm norm) {
    std::size_t n = mdp.transition.size();
    if (norm == PotentialNorm::L1 || norm == PotentialNorm::L2)
        return std::vector<double>(n, 1.0);
    return mdp.transition.data;
}

/// Solves the weighted least-squares problem for the shaping potential:
/// minimise sum_t w_t (R_t + gamma Phi(s'_t) - Phi(s_t))^2.
/// The Gram system is S x S; full column rank for gamma < 1.
Eigen::VectorXd solve_weighted_shaping_ls(const RewardTable& reward, const Mdp& mdp,
                                          const std::vector<double>& w) {
    const int S = mdp.n_states, A = mdp.n_actions;
    const double g = mdp.gamma;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(S, S);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(S);
    std::size_t idx = 0;
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            (void)a;
            for (int s2 = 0; s2 < S; ++s2, ++idx) {
                double wt = w[idx];
                if (wt == 0.0) continue;
                // Row of the shaping operator: +g at column s2, -1 at column s.
                G(s2, s2) += wt * g * g;
                G(s, s) += wt;
                G(s2, s) -= wt * g;
                G(s, s2) -= wt * g;
                double r = reward.data[idx];
                b(s2) -= wt * g * r;
                b(s) += wt * r;
            }
        }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    Eigen::VectorXd phi = ldlt.solve(b);
    if (!phi.allFinite())
        throw Error(ErrorCode::SolveFailure, "shaping least squares");
    double residual = (G * phi - b).lpNorm<Eigen::Infinity>();
    if (residual > 1e-9 * (1.0 + b.lpNorm<Eigen::Infinity>() + phi.lpNorm<Eigen::Infinity>()))
        throw Error(ErrorCode::SolveFailure, "shaping normal equations residual");
    return phi;
}

double weighted_l1_objective(const RewardTable& r, const std::vector<double>& w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < r.data.size(); ++i) acc += w[i] * std::abs(r.data[i]);
    return acc;
}

} // namespace

RewardTable canon_minimal_potential(const RewardTable& reward, const Mdp& mdp,
                                    PotentialNorm norm) {
    if (!mdp.shape_matches(reward))
        throw Error(ErrorCode::ShapeMismatch, "canon_minimal_potential");
    std::vector<double> w = potential_weights(mdp, norm);

    if (norm == PotentialNorm::L2 || norm == PotentialNorm::WeightedL2) {
        Eigen::VectorXd phi = solve_weighted_shaping_ls(reward, mdp, w);
        PotentialVector pv(phi.data(), phi.data() + phi.size());
        return apply_shaping(reward, pv, mdp);
    }

    // IRLS for the L1 objective: reweight by 1/max(|residual|, delta) and
    // re-solve until the objective stops moving. The bare iteration has a
    // slow geometric tail, so each step also probes extrapolations along the
    // last potential update and keeps whichever candidate has the lowest
    // true objective.
    constexpr int kIrlsCap = 500;
    constexpr double kIrlsTol = 1e-8;
    constexpr double kIrlsFloor = 1e-9;

    Eigen::VectorXd phi = Eigen::VectorXd::Zero(mdp.n_states);
    PotentialVector phi_v(mdp.n_states, 0.0);
    RewardTable shaped = reward;
    double prev_obj = weighted_l1_objective(shaped, w);
    for (int iter = 0; iter < kIrlsCap; ++iter) {
        std::vector<double> u(w.size());
        for (std::size_t i = 0; i < w.size(); ++i)
            u[i] = w[i] / std::max(std::abs(shaped.data[i]), kIrlsFloor);
        Eigen::VectorXd p = solve_weighted_shaping_ls(reward, mdp, u);

        phi_v.assign(p.data(), p.data() + p.size());
        RewardTable best_shaped = apply_shaping(reward, phi_v, mdp);
        double best_obj = weighted_l1_objective(best_shaped, w);
        Eigen::VectorXd best = p;
        if (iter > 0) {
            Eigen::VectorXd dir = p - phi;
            for (double omega : {3.0, 9.0, 27.0, 81.0, 243.0, 729.0}) {
                Eigen::VectorXd cand = p + omega * dir;
                phi_v.assign(cand.data(), cand.data() + cand.size());
                RewardTable cand_shaped = apply_shaping(reward, phi_v, mdp);
                double obj = weighted_l1_objective(cand_shaped, w);
                if (obj < best_obj) {
                    best_obj = obj;
                    best = cand;
                    best_shaped = std::move(cand_shaped);
                }
            }
        }
        phi = best;
        shaped = std::move(best_shaped);
        if (std::abs(best_obj - prev_obj) < kIrlsTol) return shaped;
        prev_obj = best_obj;
    }
    throw Error(ErrorCode::NonConvergence, "IRLS for minimal potential");
}

RewardTable canon_minimal_l2(const RewardTable& reward, const Mdp& mdp,
                             const Tensor3& weights) {
    if (!mdp.shape_matches(reward) || !mdp.shape_matches(weights))
        throw Error(ErrorCode::ShapeMismatch, "canon_minimal_l2");
    const int S = mdp.n_states, A = mdp.n_actions;
    if (static_cast<long>(S) * A * S > 10000)
        throw Error(ErrorCode::InstanceTooLarge, "minimal-L2 dense projection");
    for (std::size_t i = 0; i < weights.data.size(); ++i) {
        double wt = weights.data[i];
        if (!(wt >= 0.0) || !std::isfinite(wt))
            throw Error(ErrorCode::DegenerateWeights, "weight entries must be >= 0");
        if (mdp.transition.data[i] > 0.0 && !(wt > 0.0))
            throw Error(ErrorCode::DegenerateWeights,
                        "weights must be strictly positive on the tau-support");
    }

    // Any member of the orthogonal complement of the shaping+redistribution
    // span has rows proportional to g = tau / w, so it is parameterised by
    // one coefficient per (s,a). Orthogonality to the shaping directions adds
    // S linear constraints; projecting is then an equality-constrained
    // quadratic problem with an S x S KKT system.
    const double g = mdp.gamma;
    std::vector<double> rho(static_cast<std::size_t>(S) * A, 0.0); // <R, g_row>_w
    std::vector<double> h(static_cast<std::size_t>(S) * A, 0.0);   // <g_row, g_row>_w
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const double* tau = mdp.transition.row(s, a);
            const double* rew = reward.row(s, a);
            const double* wt = weights.row(s, a);
            double r_acc = 0.0, h_acc = 0.0;
            for (int s2 = 0; s2 < S; ++s2) {
                if (tau[s2] <= 0.0) continue;
                r_acc += tau[s2] * rew[s2];
                h_acc += tau[s2] * tau[s2] / wt[s2];
            }
            rho[static_cast<std::size_t>(s) * A + a] = r_acc;
            h[static_cast<std::size_t>(s) * A + a] = h_acc;
        }

    // Constraint matrix C[u][(s,a)] = gamma tau(s,a,u) - [s == u].
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(S, S * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            int col = s * A + a;
            for (int u = 0; u < S; ++u) C(u, col) = g * mdp.transition(s, a, u);
            C(s, col) -= 1.0;
        }

    // KKT: lambda = H^{-1}(rho + C^T nu) with C lambda = 0.
    Eigen::VectorXd hinv_rho(S * A);
    for (int i = 0; i < S * A; ++i) {
        if (!(h[i] > 0.0))
            throw Error(ErrorCode::DegenerateWeights, "empty transition row");
        hinv_rho(i) = rho[i] / h[i];
    }
    Eigen::MatrixXd CHinvCt = Eigen::MatrixXd::Zero(S, S);
    for (int i = 0; i < S * A; ++i)
        CHinvCt.noalias() += (1.0 / h[i]) * C.col(i) * C.col(i).transpose();
    Eigen::LDLT<Eigen::MatrixXd> kkt(CHinvCt);
    Eigen::VectorXd nu = kkt.solve(-C * hinv_rho);
    if (!nu.allFinite()) throw Error(ErrorCode::SolveFailure, "minimal-L2 KKT solve");

    Eigen::VectorXd lambda(S * A);
    Eigen::VectorXd ct_nu = C.transpose() * nu;
    for (int i = 0; i < S * A; ++i) lambda(i) = (rho[i] + ct_nu(i)) / h[i];

    RewardTable out(S, A, S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const double* tau = mdp.transition.row(s, a);
            const double* wt = weights.row(s, a);
            double* row = out.row(s, a);
            double l = lambda(s * A + a);
            for (int s2 = 0; s2 < S; ++s2)
                row[s2] = tau[s2] > 0.0 ? l * tau[s2] / wt[s2] : 0.0;
        }
    return out;
}

RewardTable canon_minimal_l2(const RewardTable& reward, const Mdp& mdp) {
    Tensor3 unit(mdp.n_states, mdp.n_actions, mdp.n_states, 1.0);
    return canon_minimal_l2(reward, mdp, unit);
}

RewardTable canon_none(const RewardTable& reward) { return reward; }

} // namespace rewardlab
