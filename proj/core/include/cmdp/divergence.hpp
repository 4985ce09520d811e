#pragma once

#include <Eigen/Dense>

#include "cmdp/exact_eval.hpp"
#include "cmdp/model.hpp"
#include "cmdp/policy.hpp"

namespace cmdp {

/// Sum_{s,a} d1(s,a) log[(d1(s,a)/d1(s)) / (d2(s,a)/d2(s))]. Throws
/// ValidationError naming the state when d2 lacks support where d1 has mass.
double pseudo_kl(const VisitationDistribution& d1, const VisitationDistribution& d2);

/// phi(d) = Sum d(s,a) log d(s,a) - Sum d(s) log d(s).
double occupancy_potential(const VisitationDistribution& d);

/// phi(d1) - phi(d2) - <grad phi(d2), d1 - d2>.
double occupancy_bregman(const VisitationDistribution& d1, const VisitationDistribution& d2);

/// Right-hand side of the visitation-distance bound:
/// gamma sqrt(2) / (1 - gamma) * sqrt(min of the four expected KL terms).
double visitation_distance_bound(const CmdpModel& model, const TabularPolicy& a,
                                 const TabularPolicy& b);

/// Slack-adjusted residual of the pushback inequality around the regularised
/// optimum `minimizer` of V_cost^pi(rho) + alpha/(1-gamma) D_{d^pi}(pi || ref):
///   max(0, LHS - RHS - slack). Zero means the inequality holds.
double pushback_residual(const CmdpModel& model, const Eigen::MatrixXd& cost,
                         const TabularPolicy& minimizer, const TabularPolicy& any,
                         const TabularPolicy& ref, double alpha, double slack);

}  // namespace cmdp
