#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmdp/exact_eval.hpp"
#include "cmdp/model.hpp"
#include "cmdp/policy.hpp"

namespace cmdp {

enum class SolveStatus { optimal, infeasible };

/// Exact CMDP solution obtained from the occupancy-measure linear program.
struct GroundTruth {
  SolveStatus status = SolveStatus::infeasible;
  double optimal_value = 0.0;
  VisitationDistribution d_star;
  Eigen::VectorXd lambda_star;
  /// Slater margin; +infinity when the model has no constraints.
  double xi = std::numeric_limits<double>::infinity();

  /// pi*(a|s) = d*(s,a) / d*(s), uniform on states without mass.
  TabularPolicy optimal_policy(double floor = 1e-300) const;
};

GroundTruth solve_lp(const CmdpModel& model);

/// Largest t with V_{c_i}^pi(rho) <= -t for all i over occupancy measures;
/// +infinity when m = 0. A value <= 0 means no strictly feasible policy.
double slater_margin(const CmdpModel& model);

/// Stationarity, feasibility and complementary-slackness residuals of a
/// ground-truth solution, each as a max-norm.
struct KktResiduals {
  double flow = 0.0;
  double primal_infeasibility = 0.0;
  double slackness = 0.0;
  double dual_infeasibility = 0.0;
  double max() const;
};
KktResiduals kkt_residuals(const CmdpModel& model, const GroundTruth& gt);

struct DualBisectionResult {
  double optimal_value = 0.0;
  double lambda_star = 0.0;
  double bracket_high = 0.0;
};

/// G(lambda) = min_pi V^pi_{c_0 + lambda c_1}(rho), by value iteration to 1e-12.
double lagrange_dual_function(const CmdpModel& model, double lambda);

/// Independent oracle for m = 1: golden-section maximisation of the concave
/// dual function over [0, 4 c_max / (xi_hat (1 - gamma))], where xi_hat comes
/// from a value-iteration feasibility probe.
DualBisectionResult dual_bisection(const CmdpModel& model);

std::string ground_truth_to_json(const GroundTruth& gt);
GroundTruth ground_truth_from_json(const std::string& text);
void write_ground_truth(const GroundTruth& gt, const std::string& path);
GroundTruth read_ground_truth(const std::string& path);

}  // namespace cmdp
