#include "cmdp/exact_eval.hpp"

#include <cmath>

#include "cmdp/errors.hpp"

namespace cmdp {

namespace {

constexpr double kResidualTol = 1e-8;

void check_shapes(const CmdpModel& model, const TabularPolicy& policy) {
  if (policy.num_states() != model.num_states || policy.num_actions() != model.num_actions)
    throw ValidationError("policy shape does not match the model");
}

Eigen::VectorXd averaged_cost(const Eigen::MatrixXd& cost, const Eigen::MatrixXd& probs) {
  return (cost.array() * probs.array()).rowwise().sum();
}

// One-step lookahead q(s,a) = c(s,a) + gamma P(.|s,a) v.
Eigen::MatrixXd lookahead(const CmdpModel& model, const Eigen::MatrixXd& cost,
                          const Eigen::VectorXd& v) {
  const Eigen::VectorXd pv = model.transition * v;
  Eigen::MatrixXd q = cost;
  for (int s = 0; s < model.num_states; ++s)
    for (int a = 0; a < model.num_actions; ++a) q(s, a) += model.gamma * pv(model.row(s, a));
  return q;
}

Eigen::VectorXd solve_value(const CmdpModel& model, const Eigen::MatrixXd& p_pi,
                            const Eigen::VectorXd& c_pi) {
  const int S = model.num_states;
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(S, S) - model.gamma * p_pi;
  Eigen::VectorXd v = system.partialPivLu().solve(c_pi);
  const double residual = (system * v - c_pi).lpNorm<Eigen::Infinity>();
  const double scale = std::max(1.0, c_pi.lpNorm<Eigen::Infinity>());
  if (!(residual <= kResidualTol * scale))
    throw NumericalError("policy evaluation residual " + std::to_string(residual) +
                         " exceeds tolerance");
  return v;
}

}  // namespace

Eigen::MatrixXd policy_kernel(const CmdpModel& model, const TabularPolicy& policy) {
  check_shapes(model, policy);
  const int S = model.num_states;
  const int A = model.num_actions;
  Eigen::MatrixXd p(S, S);
  for (int s = 0; s < S; ++s) {
    p.row(s).setZero();
    for (int a = 0; a < A; ++a) p.row(s) += policy.prob(s, a) * model.transition.row(model.row(s, a));
  }
  return p;
}

EvalBundle policy_value(const CmdpModel& model, const TabularPolicy& policy,
                        const Eigen::MatrixXd& cost) {
  check_shapes(model, policy);
  if (cost.rows() != model.num_states || cost.cols() != model.num_actions)
    throw ValidationError("cost shape does not match the model");
  const Eigen::MatrixXd probs = policy.probabilities();
  EvalBundle out;
  out.v = solve_value(model, policy_kernel(model, policy), averaged_cost(cost, probs));
  out.q = lookahead(model, cost, out.v);
  out.v_rho = model.rho.dot(out.v);

  const double bound = cost.cwiseAbs().maxCoeff() / (1.0 - model.gamma);
  const double vmax = out.v.cwiseAbs().maxCoeff();
  if (vmax > bound * (1.0 + 1e-9) + 1e-12)
    throw AssertionFailure("|V| = " + std::to_string(vmax) + " exceeds max|c| / (1 - gamma) = " +
                               std::to_string(bound),
                           -1);
  return out;
}

double value_at_rho(const CmdpModel& model, const TabularPolicy& policy,
                    const Eigen::MatrixXd& cost) {
  return policy_value(model, policy, cost).v_rho;
}

Eigen::VectorXd all_values(const CmdpModel& model, const TabularPolicy& policy) {
  check_shapes(model, policy);
  const int S = model.num_states;
  const int m = model.num_constraints();
  const Eigen::MatrixXd probs = policy.probabilities();
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(S, S) - model.gamma * policy_kernel(model, policy);
  const auto lu = system.partialPivLu();
  Eigen::MatrixXd rhs(S, m + 1);
  rhs.col(0) = averaged_cost(model.objective_cost, probs);
  for (int i = 0; i < m; ++i) rhs.col(i + 1) = averaged_cost(model.constraint_costs[i], probs);
  const Eigen::MatrixXd v = lu.solve(rhs);
  const double residual = (system * v - rhs).lpNorm<Eigen::Infinity>();
  if (!(residual <= kResidualTol * std::max(1.0, rhs.lpNorm<Eigen::Infinity>())))
    throw NumericalError("policy evaluation residual exceeds tolerance");
  return v.transpose() * model.rho;
}

VisitationDistribution visitation(const CmdpModel& model, const TabularPolicy& policy) {
  check_shapes(model, policy);
  const int S = model.num_states;
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(S, S) - model.gamma * policy_kernel(model, policy).transpose();
  const Eigen::VectorXd rhs = (1.0 - model.gamma) * model.rho;
  Eigen::VectorXd mu = system.partialPivLu().solve(rhs);
  const double residual = (system * mu - rhs).lpNorm<Eigen::Infinity>();
  if (!(residual <= kResidualTol)) throw NumericalError("visitation residual exceeds tolerance");
  mu = mu.cwiseMax(0.0);
  VisitationDistribution out;
  out.d = policy.probabilities();
  for (int s = 0; s < S; ++s) out.d.row(s) *= mu(s);
  return out;
}

double flow_residual(const CmdpModel& model, const Eigen::MatrixXd& d) {
  const int S = model.num_states;
  const int A = model.num_actions;
  Eigen::VectorXd inflow = (1.0 - model.gamma) * model.rho;
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      inflow += model.gamma * d(s, a) * model.transition.row(model.row(s, a)).transpose();
  return (inflow - d.rowwise().sum()).lpNorm<Eigen::Infinity>();
}

EvalBundle regularized_value(const CmdpModel& model, const TabularPolicy& policy,
                             const TabularPolicy& ref, const Eigen::MatrixXd& cost, double alpha) {
  check_shapes(model, policy);
  check_shapes(model, ref);
  // Exact PMD drives log-probs far below log(1e-300); only a true zero is unusable.
  if (!ref.log_probs().allFinite())
    throw ValidationError("reference policy has a zero or non-finite probability");
  const Eigen::MatrixXd probs = policy.probabilities();
  const Eigen::MatrixXd augmented =
      cost + alpha * (policy.log_probs() - ref.log_probs());
  EvalBundle out;
  out.v = solve_value(model, policy_kernel(model, policy), averaged_cost(augmented, probs));
  out.q = lookahead(model, cost - alpha * ref.log_probs(), out.v);
  out.v_rho = model.rho.dot(out.v);
  return out;
}

double bellman_residual(const CmdpModel& model, const TabularPolicy& policy,
                        const Eigen::MatrixXd& cost, const Eigen::VectorXd& v) {
  const Eigen::VectorXd c_pi = averaged_cost(cost, policy.probabilities());
  const Eigen::VectorXd target = c_pi + model.gamma * policy_kernel(model, policy) * v;
  return (v - target).lpNorm<Eigen::Infinity>();
}

}  // namespace cmdp
