#pragma once

#include <Eigen/Dense>

#include "cmdp/model.hpp"
#include "cmdp/policy.hpp"

namespace cmdp {

/// State values, state-action values and the rho-weighted value of one policy
/// under one cost.
struct EvalBundle {
  Eigen::VectorXd v;
  Eigen::MatrixXd q;
  double v_rho = 0.0;
};

/// Discounted state-action visitation distribution d_rho^pi (sums to one).
struct VisitationDistribution {
  Eigen::MatrixXd d;

  Eigen::VectorXd marginal() const { return d.rowwise().sum(); }
};

/// Policy-averaged kernel P_pi (|S| x |S|).
Eigen::MatrixXd policy_kernel(const CmdpModel& model, const TabularPolicy& policy);

/// Solves (I - gamma P_pi) v = c_pi by partial-pivot LU, then fills q from the
/// one-step Bellman identity. Throws NumericalError when the residual exceeds
/// 1e-8 and AssertionFailure when |v| breaks max|cost| / (1 - gamma).
EvalBundle policy_value(const CmdpModel& model, const TabularPolicy& policy,
                        const Eigen::MatrixXd& cost);

/// V_c^pi(rho) only.
double value_at_rho(const CmdpModel& model, const TabularPolicy& policy,
                    const Eigen::MatrixXd& cost);

/// (V_{c_0}, V_{c_1}, ..., V_{c_m}) at rho.
Eigen::VectorXd all_values(const CmdpModel& model, const TabularPolicy& policy);

VisitationDistribution visitation(const CmdpModel& model, const TabularPolicy& policy);

/// Largest flow-constraint residual of d against the model's dynamics.
double flow_residual(const CmdpModel& model, const Eigen::MatrixXd& d);

/// KL-regularised evaluation relative to `ref`:
///   v  = value of cost(s,a) + alpha log(pi(a|s) / ref(a|s)) under pi,
///   q  = cost(s,a) + alpha log(1 / ref(a|s)) + gamma E_{s'} v(s').
/// Rejects references with a zero (non-finite log) probability.
EvalBundle regularized_value(const CmdpModel& model, const TabularPolicy& policy,
                             const TabularPolicy& ref, const Eigen::MatrixXd& cost, double alpha);

/// ||v - (c_pi + gamma P_pi v)||_inf.
double bellman_residual(const CmdpModel& model, const TabularPolicy& policy,
                        const Eigen::MatrixXd& cost, const Eigen::VectorXd& v);

}  // namespace cmdp
