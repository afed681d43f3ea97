#pragma once

#include <Eigen/Dense>

namespace rewardlab {

struct LpSolution {
    double value;
    Eigen::VectorXd x;
};

/// Maximises c.x subject to A x = b, x >= 0, with b >= 0.
/// Dense two-phase tableau simplex using Bland's rule, so it terminates on
/// degenerate instances. Intended for small problems (tens of rows).
LpSolution solve_lp_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                        const Eigen::VectorXd& c);

} // namespace rewardlab
