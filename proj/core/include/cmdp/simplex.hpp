#pragma once

#include <Eigen/Dense>

namespace cmdp {

/// min cost . x  s.t.  a_eq x = b_eq,  a_ub x <= b_ub,  x >= 0.
struct LinearProgram {
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_ub;
  Eigen::VectorXd b_ub;
  Eigen::VectorXd cost;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  /// Multipliers y with cost - a_eq^T y_eq - a_ub^T y_ub >= 0 at optimality;
  /// y_ub <= 0.
  Eigen::VectorXd dual_eq;
  Eigen::VectorXd dual_ub;
  int pivots = 0;
};

/// Dense two-phase tableau simplex with Bland's anti-cycling rule. The final
/// primal and dual values are recomputed from a fresh factorisation of the
/// optimal basis.
LpSolution solve_simplex(const LinearProgram& lp, double tolerance = 1e-10);

}  // namespace cmdp
