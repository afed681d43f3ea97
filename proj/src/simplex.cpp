#include "rewardlab/simplex.hpp"

#include <vector>

#include "rewardlab/errors.hpp"

namespace rewardlab {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kFeasTol = 1e-7;

/// Canonical tableau: rows 0..m-1 are constraints with the rhs in the last
/// column; row m is the reduced-cost row of the minimisation objective, with
/// the negated objective value in its last cell.
struct Tableau {
    Eigen::MatrixXd t;
    std::vector<int> basis;
    int m, n; // constraint rows, structural columns (excl. rhs)

    void pivot(int row, int col) {
        t.row(row) /= t(row, col);
        for (int i = 0; i <= m; ++i) {
            if (i == row) continue;
            double factor = t(i, col);
            if (factor != 0.0) t.row(i) -= factor * t.row(row);
        }
        basis[row] = col;
    }

    /// Minimises the current cost row over columns [0, limit). Bland's rule:
    /// the entering column is the lowest index with a negative reduced cost;
    /// ratio ties leave the lowest basis index. Returns false if unbounded.
    bool iterate(int limit) {
        for (;;) {
            int enter = -1;
            for (int j = 0; j < limit; ++j)
                if (t(m, j) < -kCostTol) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;
            int leave = -1;
            double best = 0.0;
            for (int i = 0; i < m; ++i) {
                if (t(i, enter) > kPivotTol) {
                    double ratio = t(i, n) / t(i, enter);
                    if (leave < 0 || ratio < best - 1e-12 ||
                        (ratio <= best + 1e-12 && basis[i] < basis[leave])) {
                        leave = i;
                        best = ratio;
                    }
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
    }
};

} // namespace

LpSolution solve_lp_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                        const Eigen::VectorXd& c) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    for (int i = 0; i < m; ++i)
        if (b(i) < 0.0)
            throw Error(ErrorCode::LpInfeasible, "rhs must be nonnegative");

    // Phase 1: artificial columns n..n+m-1, minimise their sum.
    Tableau tab;
    tab.m = m;
    tab.n = n + m;
    tab.t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
    tab.t.block(0, 0, m, n) = A;
    tab.t.block(0, n, m, m) = Eigen::MatrixXd::Identity(m, m);
    tab.t.block(0, n + m, m, 1) = b;
    tab.basis.resize(m);
    for (int i = 0; i < m; ++i) tab.basis[i] = n + i;
    // Reduced costs of min sum(artificials): subtract each constraint row.
    for (int j = 0; j <= n + m; ++j) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) acc += tab.t(i, j);
        tab.t(m, j) = (j >= n && j < n + m ? 1.0 : 0.0) - acc;
    }
    if (!tab.iterate(n + m))
        throw Error(ErrorCode::LpInfeasible, "phase 1 unbounded");
    if (tab.t(m, tab.n) < -kFeasTol)
        throw Error(ErrorCode::LpInfeasible, "no feasible point");

    // Drive leftover artificial variables out of the basis where possible.
    for (int i = 0; i < m; ++i) {
        if (tab.basis[i] < n) continue;
        int col = -1;
        for (int j = 0; j < n; ++j)
            if (std::abs(tab.t(i, j)) > kPivotTol) {
                col = j;
                break;
            }
        if (col >= 0) tab.pivot(i, col);
        // otherwise the row is redundant; the artificial stays basic at zero
    }

    // Phase 2: replace the cost row with the real (negated, for minimisation)
    // objective, priced out against the current basis.
    for (int j = 0; j < n + m; ++j) tab.t(m, j) = j < n ? -c(j) : 0.0;
    tab.t(m, tab.n) = 0.0;
    for (int i = 0; i < m; ++i) {
        int bj = tab.basis[i];
        double cost = bj < n ? -c(bj) : 0.0;
        if (cost != 0.0) tab.t.row(m) -= cost * tab.t.row(i);
    }
    if (!tab.iterate(n)) // artificials may not re-enter
        throw Error(ErrorCode::LpInfeasible, "objective unbounded");

    LpSolution sol;
    sol.x = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i)
        if (tab.basis[i] < n) sol.x(tab.basis[i]) = tab.t(i, tab.n);
    sol.value = c.dot(sol.x);
    return sol;
}

} // namespace rewardlab
