#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "cmdp/history.hpp"
#include "cmdp/model.hpp"
#include "cmdp/policy.hpp"

namespace cmdp {

/// Lagrange multipliers of the modified dual update, with the constraint
/// values that produced them.
struct DualState {
  Eigen::VectorXd lambda;
  double eta_prime = 1.0;
  /// Last V_{c_i}^{pi_k}(rho) fed to the dual logic (exact or estimated).
  Eigen::VectorXd cached_v;

  double lambda_l1() const { return lambda.sum(); }
};

/// c~_k = c_0 + Sum_i (lambda_i + eta' cached_v_i) c_i.
Eigen::MatrixXd modified_cost(const CmdpModel& model, const DualState& dual);

/// c_max (1 + Sum lambda_i + m eta' c_max / (1 - gamma)).
double modified_cost_bound(const CmdpModel& model, const DualState& dual);

/// lambda_0,i = max(0, -eta' V_i). Asserts |lambda_0,i| <= |eta' V_i|.
DualState init_dual(const Eigen::VectorXd& initial_values, double eta_prime);

/// lambda_{k+1,i} = max(-eta' v_i, lambda_k,i + eta' v_i); asserts the three
/// multiplier properties (nonnegativity, nonnegative modified multiplier,
/// |lambda_{k+1,i}| >= |eta' v_i|). `step` is used in failure messages.
DualState dual_update(const DualState& dual, const Eigen::VectorXd& v_new, int step = 0);

/// Residual of <lambda_k, v> >= (|lambda_{k+1}|^2 - |lambda_k|^2) / (2 eta') - eta' |v|^2;
/// non-positive when the inequality holds.
double dual_lower_bound_residual(const DualState& before, const DualState& after);

struct TheoremParams {
  double alpha = 0.0;
  double eta = 0.0;
  int inner_steps = 1;
  double c_k = 0.0;
};

/// alpha = 2 gamma^2 m eta' / (1 - gamma)^3, eta = (1 - gamma) / alpha,
/// C_k = 2 gamma c_max ((1 + lambda_sum) / (1 - gamma) + m eta' c_max / (1 - gamma)^2),
/// t_k = ceil(max(log(3 K C_k) / (eta alpha), 1)). Requires m >= 1.
TheoremParams theorem_params(const CmdpModel& model, double eta_prime, int macro_steps,
                             double lambda_sum);

/// C_k for arbitrary (alpha, eta) pairs, as above.
double inner_constant(const CmdpModel& model, double eta_prime, double lambda_sum);

/// Right-hand side of the averaged optimality-gap bound:
/// (alpha log|A| / (1 - gamma) + 1 + 2 / (3 (1 - gamma))) / K.
double gap_bound(const CmdpModel& model, double alpha, int macro_steps);

/// Right-hand side of the averaged constraint-violation bound.
double violation_bound(const CmdpModel& model, double alpha, double eta_prime,
                       double lambda_star_norm, int macro_steps);

/// Uniform bound on |lambda_k| in terms of |lambda*|.
double lambda_norm_bound(const CmdpModel& model, double alpha, double eta_prime,
                         double lambda_star_norm);

/// Pessimism constant b of the zero-violation variant. Requires xi > 0.
double pessimism_b(double xi, double eta_prime, double alpha, double gamma, int num_constraints,
                   int num_actions);

/// Source of values for the primal-dual loop: exact evaluation or sampling.
class ValueOracle {
 public:
  virtual ~ValueOracle() = default;
  /// V_{c_i}^pi(rho) for i = 1..m as consumed by the dual update.
  virtual Eigen::VectorXd constraint_values(const TabularPolicy& policy) = 0;
  /// Q~_{k,alpha}^{current} for the modified cost relative to `anchor` (pi_k).
  virtual Eigen::MatrixXd regularized_q(const TabularPolicy& current, const TabularPolicy& anchor,
                                        const Eigen::MatrixXd& cost, double alpha) = 0;
  /// Called before the inner loop of macro step k (0-based).
  virtual void begin_macro_step(int /*k*/, const DualState& /*dual*/) {}
  virtual bool exact() const { return true; }
  virtual std::optional<long long> queries() const { return std::nullopt; }
};

/// Exact oracle backed by dense linear solves.
class ExactOracle final : public ValueOracle {
 public:
  explicit ExactOracle(const CmdpModel& model) : model_(&model) {}
  Eigen::VectorXd constraint_values(const TabularPolicy& policy) override;
  Eigen::MatrixXd regularized_q(const TabularPolicy& current, const TabularPolicy& anchor,
                                const Eigen::MatrixXd& cost, double alpha) override;

 private:
  const CmdpModel* model_;
};

/// Quantities obtained from the ground truth, used by runtime assertions.
struct RunReference {
  double optimal_value = 0.0;
  Eigen::VectorXd lambda_star;
};

struct PmdPdConfig {
  int macro_steps = 100;
  double eta_prime = 1.0;
  /// Unset alpha and eta select the theorem values. Setting only eta yields
  /// alpha = (1 - gamma) / eta and vice versa.
  std::optional<double> alpha;
  std::optional<double> eta;
  /// Unset selects the theorem schedule t_k.
  std::optional<int> inner_steps;
  /// Constraint tightening V_{c_i} <= -delta for the zero-violation variant.
  double pessimism = 0.0;
  std::optional<double> xi;
  std::uint64_t seed = 0;
  /// Under the theorem schedule with an exact oracle, verify each inner loop
  /// against the regularised optimum (extra solve per macro step).
  bool check_inner_optimality = true;
  bool keep_policies = false;
};

/// Resolved (alpha, eta) of a configuration for a model.
std::pair<double, double> resolve_step_sizes(const CmdpModel& model, const PmdPdConfig& config);

/// Called with every inner iterate: (k, t, pi_k^{(t)}) for t = 0..t_k.
using InnerObserver = std::function<void(int, int, const TabularPolicy&)>;

/// t_k applications of the entropy-regularised NPG step from pi_k, with
/// Q~ supplied by the oracle.
TabularPolicy inner_loop(const TabularPolicy& anchor, const Eigen::MatrixXd& cost, double alpha,
                         double eta, double gamma, int inner_steps, ValueOracle& oracle,
                         const InnerObserver& observer = {}, int k = 0);

/// Regularised optimum argmin_pi V~_{k,alpha}^pi, by iterating the step with
/// eta = (1 - gamma) / alpha until the sup-norm change of V~ is <= tol.
TabularPolicy solve_regularized(const CmdpModel& model, const TabularPolicy& anchor,
                                const Eigen::MatrixXd& cost, double alpha, double tol = 1e-11,
                                int max_iterations = 100000);

/// Policy mirror descent primal-dual. Records pi_1 ... pi_K and asserts the
/// multiplier properties and dual lower bound at every step (warnings instead
/// of failures for inexact oracles).
RunHistory run_pmd_pd(const CmdpModel& model, const PmdPdConfig& config, ValueOracle& oracle,
                      const std::optional<RunReference>& reference = std::nullopt,
                      const InnerObserver& observer = {});
RunHistory run_pmd_pd(const CmdpModel& model, const PmdPdConfig& config,
                      const std::optional<RunReference>& reference = std::nullopt);

/// Zero-violation variant: PMD-PD on the model with constraints shifted by
/// delta (1 - gamma), delta = b / K. Requires config.xi and K >= 2 b / xi.
/// Recorded values are in the original costs.
RunHistory run_pmd_pd_zero(const CmdpModel& model, const PmdPdConfig& config,
                           const std::optional<RunReference>& reference = std::nullopt);

/// Minimum K accepted by run_pmd_pd_zero.
int zero_violation_min_steps(const CmdpModel& model, const PmdPdConfig& config);

namespace detail {

struct MacroLoopSettings {
  std::string algorithm;
  int macro_steps = 1;
  double eta_prime = 1.0;
  double alpha = 0.0;
  double eta = 0.0;
  std::function<int(int, const DualState&)> schedule;
  bool theorem_schedule = false;
  bool check_inner_optimality = false;
  bool keep_policies = false;
  std::optional<RunReference> reference;
};

/// Shared outer loop of the exact and sample-based algorithms. `model` is
/// the problem the algorithm optimises, `report_model` gives the recorded values.
RunHistory run_macro_loop(const CmdpModel& model, const CmdpModel& report_model,
                          const MacroLoopSettings& settings, ValueOracle& oracle,
                          const InnerObserver& observer);

}  // namespace detail

}  // namespace cmdp
