#include "cmdp/baselines.hpp"

#include <algorithm>
#include <limits>

#include "cmdp/errors.hpp"
#include "cmdp/exact_eval.hpp"

namespace cmdp {

double npg_pd_dual_cap(double gamma, double xi) {
  if (!(xi > 0.0)) throw ParameterError("NPG-PD needs a positive Slater margin xi");
  return 2.0 / ((1.0 - gamma) * xi);
}

RunHistory run_npg_pd(const CmdpModel& model, const BaselineConfig& config) {
  require_valid(model);
  if (!(config.eta > 0.0) || !(config.eta_prime > 0.0))
    throw ParameterError("NPG-PD step sizes must be positive");
  if (config.iterations < 1) throw ParameterError("iterations must be at least 1");
  const int m = model.num_constraints();
  double cap = std::numeric_limits<double>::infinity();
  if (m > 0) {
    if (!config.xi) throw ParameterError("NPG-PD requires xi");
    cap = npg_pd_dual_cap(model.gamma, *config.xi);
  }
  RunHistory h("npg-pd", m);
  TabularPolicy pi = uniform_policy(model.num_states, model.num_actions);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  for (int t = 0; t < config.iterations; ++t) {
    Eigen::MatrixXd cost = model.objective_cost;
    for (int i = 0; i < m; ++i) cost += lambda(i) * model.constraint_costs[i];
    pi = npg_step(pi, policy_value(model, pi, cost).q, config.eta);
    Eigen::VectorXd values = all_values(model, pi);
    for (int i = 0; i < m; ++i)
      lambda(i) = std::clamp(lambda(i) + config.eta_prime * values(i + 1), 0.0, cap);
    h.append(1, std::move(values), lambda, pi.fingerprint());
    if (config.keep_policies) h.policies().push_back(pi);
  }
  return h;
}

RunHistory run_crpo(const CmdpModel& model, const BaselineConfig& config) {
  require_valid(model);
  if (!(config.eta > 0.0)) throw ParameterError("CRPO step size must be positive");
  if (config.tolerance < 0.0) throw ParameterError("CRPO tolerance must be nonnegative");
  if (config.iterations < 1) throw ParameterError("iterations must be at least 1");
  const int m = model.num_constraints();
  RunHistory h("crpo", m);
  TabularPolicy pi = uniform_policy(model.num_states, model.num_actions);
  Eigen::VectorXd values = all_values(model, pi);
  const Eigen::VectorXd no_duals = Eigen::VectorXd::Zero(m);
  for (int t = 0; t < config.iterations; ++t) {
    int target = -1;
    double worst = config.tolerance;
    for (int i = 0; i < m; ++i)
      if (values(i + 1) > worst) {
        worst = values(i + 1);
        target = i;
      }
    const Eigen::MatrixXd& cost = target < 0 ? model.objective_cost : model.constraint_costs[target];
    pi = npg_step(pi, policy_value(model, pi, cost).q, config.eta);
    values = all_values(model, pi);
    h.append(1, values, no_duals, pi.fingerprint());
    if (config.keep_policies) h.policies().push_back(pi);
  }
  return h;
}

}  // namespace cmdp
