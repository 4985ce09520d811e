#include "cmdp/pmd_pd.hpp"

#include <cmath>
#include <sstream>

#include "cmdp/errors.hpp"
#include "cmdp/exact_eval.hpp"

namespace cmdp {

namespace {

constexpr double kAssertTol = 1e-12;

std::string fmt(double x) { return format_decimal(x); }

void require_constraints(const CmdpModel& model, const char* who) {
  if (model.num_constraints() < 1)
    throw ParameterError(std::string(who) + ": requires at least one constraint");
}

void check_eta_prime(double eta_prime) {
  if (!(eta_prime > 0.0 && eta_prime <= 1.0))
    throw ParameterError("eta_prime must lie in (0, 1]");
}

}  // namespace

Eigen::MatrixXd modified_cost(const CmdpModel& model, const DualState& dual) {
  Eigen::MatrixXd c = model.objective_cost;
  for (int i = 0; i < model.num_constraints(); ++i)
    c += (dual.lambda(i) + dual.eta_prime * dual.cached_v(i)) * model.constraint_costs[i];
  return c;
}

double modified_cost_bound(const CmdpModel& model, const DualState& dual) {
  const double cm = model.cost_scale;
  return cm * (1.0 + dual.lambda_l1() +
               model.num_constraints() * dual.eta_prime * cm / (1.0 - model.gamma));
}

DualState init_dual(const Eigen::VectorXd& initial_values, double eta_prime) {
  check_eta_prime(eta_prime);
  DualState d;
  d.eta_prime = eta_prime;
  d.cached_v = initial_values;
  d.lambda = (-eta_prime * initial_values).cwiseMax(0.0);
  for (int i = 0; i < d.lambda.size(); ++i)
    if (std::abs(d.lambda(i)) > std::abs(eta_prime * initial_values(i)) + kAssertTol)
      throw AssertionFailure("initial multiplier " + std::to_string(i) + " exceeds |eta' V|", 0);
  return d;
}

DualState dual_update(const DualState& dual, const Eigen::VectorXd& v_new, int step) {
  const double ep = dual.eta_prime;
  DualState next;
  next.eta_prime = ep;
  next.cached_v = v_new;
  next.lambda.resize(v_new.size());
  for (int i = 0; i < v_new.size(); ++i) {
    const double l = std::max(-ep * v_new(i), dual.lambda(i) + ep * v_new(i));
    next.lambda(i) = l;
    const std::string who = "multiplier " + std::to_string(i) + " = " + fmt(l);
    if (l < -kAssertTol) throw AssertionFailure(who + " is negative", step);
    if (l + ep * v_new(i) < -kAssertTol)
      throw AssertionFailure(who + ": lambda + eta' V is negative", step);
    if (std::abs(l) < std::abs(ep * v_new(i)) - kAssertTol)
      throw AssertionFailure(who + " is below |eta' V|", step);
  }
  return next;
}

double dual_lower_bound_residual(const DualState& before, const DualState& after) {
  const Eigen::VectorXd& v = after.cached_v;
  const double ep = before.eta_prime;
  const double lhs = before.lambda.dot(v);
  const double rhs = (after.lambda.squaredNorm() - before.lambda.squaredNorm()) / (2.0 * ep) -
                     ep * v.squaredNorm();
  return rhs - lhs;
}

double inner_constant(const CmdpModel& model, double eta_prime, double lambda_sum) {
  const double g = model.gamma;
  const double cm = model.cost_scale;
  const int m = model.num_constraints();
  return 2.0 * g * cm * ((1.0 + lambda_sum) / (1.0 - g) + m * eta_prime * cm / ((1.0 - g) * (1.0 - g)));
}

TheoremParams theorem_params(const CmdpModel& model, double eta_prime, int macro_steps,
                             double lambda_sum) {
  require_constraints(model, "theorem_params");
  check_eta_prime(eta_prime);
  if (macro_steps < 1) throw ParameterError("theorem_params: K must be at least 1");
  const double g = model.gamma;
  const int m = model.num_constraints();
  TheoremParams p;
  p.alpha = 2.0 * g * g * m * eta_prime / std::pow(1.0 - g, 3);
  if (!(p.alpha > 0.0)) throw ParameterError("theorem_params: gamma = 0 gives alpha = 0");
  p.eta = (1.0 - g) / p.alpha;
  p.c_k = inner_constant(model, eta_prime, lambda_sum);
  const double raw = std::log(3.0 * macro_steps * p.c_k) / (p.eta * p.alpha);
  p.inner_steps = static_cast<int>(std::ceil(std::max(raw, 1.0)));
  return p;
}

double gap_bound(const CmdpModel& model, double alpha, int macro_steps) {
  const double g = model.gamma;
  return (alpha * std::log(double(model.num_actions)) / (1.0 - g) + 1.0 + 2.0 / (3.0 * (1.0 - g))) /
         macro_steps;
}

double violation_bound(const CmdpModel& model, double alpha, double eta_prime,
                       double lambda_star_norm, int macro_steps) {
  const double g = model.gamma;
  const double cm = model.cost_scale;
  const int m = model.num_constraints();
  const double l = lambda_star_norm / eta_prime;
  const double radicand = l * l + 2.0 * alpha * std::log(double(model.num_actions)) / ((1.0 - g) * eta_prime) +
                          (2.0 / eta_prime) * (1.0 + 2.0 / (3.0 * (1.0 - g))) +
                          2.0 * m * cm * cm / ((1.0 - g) * (1.0 - g));
  return (l + std::sqrt(radicand)) / macro_steps;
}

double lambda_norm_bound(const CmdpModel& model, double alpha, double eta_prime,
                         double lambda_star_norm) {
  const double g = model.gamma;
  const double cm = model.cost_scale;
  const int m = model.num_constraints();
  const double inner = alpha * std::log(double(model.num_actions)) / (1.0 - g) + 1.0 +
                       2.0 / (3.0 * (1.0 - g)) + m * eta_prime * cm * cm / ((1.0 - g) * (1.0 - g));
  return lambda_star_norm + std::sqrt(lambda_star_norm * lambda_star_norm + 2.0 * eta_prime * inner);
}

double pessimism_b(double xi, double eta_prime, double alpha, double gamma, int num_constraints,
                   int num_actions) {
  if (!(xi > 0.0)) throw ParameterError("pessimism_b: xi must be positive");
  const double g = gamma;
  const double t1 = 4.0 / (xi * (1.0 - g) * eta_prime);
  const double radicand = t1 * t1 + 2.0 * alpha * std::log(double(num_actions)) / ((1.0 - g) * eta_prime) +
                          (2.0 / eta_prime) * (1.0 + 2.0 / (3.0 * (1.0 - g))) +
                          2.0 * num_constraints / ((1.0 - g) * (1.0 - g));
  return t1 + std::sqrt(radicand);
}

Eigen::VectorXd ExactOracle::constraint_values(const TabularPolicy& policy) {
  return all_values(*model_, policy).tail(model_->num_constraints());
}

Eigen::MatrixXd ExactOracle::regularized_q(const TabularPolicy& current, const TabularPolicy& anchor,
                                           const Eigen::MatrixXd& cost, double alpha) {
  return regularized_value(*model_, current, anchor, cost, alpha).q;
}

std::pair<double, double> resolve_step_sizes(const CmdpModel& model, const PmdPdConfig& config) {
  const double g = model.gamma;
  double alpha, eta;
  if (config.alpha && config.eta) {
    alpha = *config.alpha;
    eta = *config.eta;
  } else if (config.alpha) {
    alpha = *config.alpha;
    eta = (1.0 - g) / alpha;
  } else if (config.eta) {
    eta = *config.eta;
    alpha = (1.0 - g) / eta;
  } else {
    const TheoremParams p = theorem_params(model, config.eta_prime, std::max(1, config.macro_steps), 0.0);
    alpha = p.alpha;
    eta = p.eta;
  }
  if (!(alpha > 0.0) || !(eta > 0.0)) throw ParameterError("alpha and eta must be positive");
  if (eta > (1.0 - g) / alpha * (1.0 + 1e-12))
    throw ParameterError("eta must not exceed (1 - gamma) / alpha");
  return {alpha, eta};
}

TabularPolicy inner_loop(const TabularPolicy& anchor, const Eigen::MatrixXd& cost, double alpha,
                         double eta, double gamma, int inner_steps, ValueOracle& oracle,
                         const InnerObserver& observer, int k) {
  TabularPolicy pi = anchor;
  if (observer) observer(k, 0, pi);
  for (int t = 0; t < inner_steps; ++t) {
    const Eigen::MatrixXd q = oracle.regularized_q(pi, anchor, cost, alpha);
    pi = npg_entropy_step(pi, q, alpha, eta, gamma);
    if (observer) observer(k, t + 1, pi);
  }
  return pi;
}

TabularPolicy solve_regularized(const CmdpModel& model, const TabularPolicy& anchor,
                                const Eigen::MatrixXd& cost, double alpha, double tol,
                                int max_iterations) {
  const double eta = (1.0 - model.gamma) / alpha;
  TabularPolicy pi = anchor;
  EvalBundle cur = regularized_value(model, pi, anchor, cost, alpha);
  for (int it = 0; it < max_iterations; ++it) {
    pi = npg_entropy_step(pi, cur.q, alpha, eta, model.gamma);
    EvalBundle next = regularized_value(model, pi, anchor, cost, alpha);
    const double change = (next.v - cur.v).lpNorm<Eigen::Infinity>();
    cur = std::move(next);
    if (change <= tol) return pi;
  }
  throw NumericalError("solve_regularized: no convergence");
}

namespace detail {

RunHistory run_macro_loop(const CmdpModel& model, const CmdpModel& report_model,
                          const MacroLoopSettings& s, ValueOracle& oracle,
                          const InnerObserver& observer) {
  require_valid(model);
  check_eta_prime(s.eta_prime);
  if (s.macro_steps < 1) throw ParameterError("K must be at least 1");
  const int m = model.num_constraints();
  RunHistory history(s.algorithm, m);
  if (s.reference) history.set_reference_value(s.reference->optimal_value);
  const bool strict = oracle.exact();
  const bool check_lambda = s.theorem_schedule && s.reference &&
                            s.reference->lambda_star.size() == m && m > 0;
  const double lambda_cap =
      check_lambda ? lambda_norm_bound(model, s.alpha, s.eta_prime, s.reference->lambda_star.norm()) : 0.0;

  auto report = [&](const std::string& msg, int step) {
    if (strict) throw AssertionFailure(msg, step);
    history.warnings().push_back(msg + " (step " + std::to_string(step) + ")");
  };

  TabularPolicy pi = uniform_policy(model.num_states, model.num_actions);
  DualState dual = init_dual(oracle.constraint_values(pi), s.eta_prime);

  for (int k = 0; k < s.macro_steps; ++k) {
    oracle.begin_macro_step(k, dual);
    const int t_k = s.schedule(k, dual);
    const Eigen::MatrixXd cost = modified_cost(model, dual);
    const double cost_bound = modified_cost_bound(model, dual);
    if (cost.cwiseAbs().maxCoeff() > cost_bound * (1.0 + 1e-12) && strict)
      report("modified cost exceeds its bound " + fmt(cost_bound), k);

    TabularPolicy next = inner_loop(pi, cost, s.alpha, s.eta, model.gamma, t_k, oracle, observer, k);

    if (s.check_inner_optimality && s.theorem_schedule && strict) {
      const TabularPolicy opt = solve_regularized(model, pi, cost, s.alpha);
      const double v_opt = regularized_value(model, opt, pi, cost, s.alpha).v_rho;
      const double v_got = regularized_value(model, next, pi, cost, s.alpha).v_rho;
      const double slack = 1e-9 * std::max(1.0, std::abs(v_opt));
      if (v_got > v_opt + 1.0 / s.macro_steps + slack)
        report("inner loop suboptimality " + fmt(v_got - v_opt) + " exceeds 1/K", k);
      const double lg = max_log_gap(opt, next);
      if (lg > 2.0 / (3.0 * s.alpha * s.macro_steps) + 1e-9)
        report("inner loop log-policy gap " + fmt(lg) + " exceeds 2/(3 alpha K)", k);
    }

    const Eigen::VectorXd v_new = oracle.constraint_values(next);
    const DualState updated = dual_update(dual, v_new, k + 1);
    const double lb = dual_lower_bound_residual(dual, updated);
    if (lb > 1e-10 * std::max(1.0, updated.lambda.squaredNorm()))
      throw AssertionFailure("dual lower bound violated by " + fmt(lb), k + 1);
    if (check_lambda && updated.lambda.norm() > lambda_cap * (1.0 + 1e-12))
      report("|lambda| = " + fmt(updated.lambda.norm()) + " exceeds its bound " + fmt(lambda_cap), k + 1);

    Eigen::VectorXd values = all_values(report_model, next);
    MacroRecord& rec = history.append(t_k, std::move(values), updated.lambda, next.fingerprint());
    if (!strict) rec.estimates = v_new;
    if (auto q = oracle.queries()) rec.queries_cumulative = *q;
    if (s.keep_policies) history.policies().push_back(next);

    pi = std::move(next);
    dual = updated;
  }
  return history;
}

}  // namespace detail

RunHistory run_pmd_pd(const CmdpModel& model, const PmdPdConfig& config, ValueOracle& oracle,
                      const std::optional<RunReference>& reference, const InnerObserver& observer) {
  require_valid(model);
  const auto [alpha, eta] = resolve_step_sizes(model, config);
  detail::MacroLoopSettings s;
  s.algorithm = config.pessimism > 0.0 ? "pmd-pd-zero" : "pmd-pd";
  s.macro_steps = config.macro_steps;
  s.eta_prime = config.eta_prime;
  s.alpha = alpha;
  s.eta = eta;
  s.keep_policies = config.keep_policies;
  s.check_inner_optimality = config.check_inner_optimality;
  s.reference = reference;
  const CmdpModel* solved = &model;
  CmdpModel shifted;
  if (config.pessimism > 0.0) {
    shifted = shift_constraints(model, config.pessimism * (1.0 - model.gamma));
    solved = &shifted;
  }
  const bool theorem = !config.inner_steps && !config.alpha && !config.eta && model.num_constraints() > 0;
  s.theorem_schedule = theorem;
  if (config.inner_steps) {
    if (*config.inner_steps < 0) throw ParameterError("inner_steps must be nonnegative");
    const int fixed = *config.inner_steps;
    s.schedule = [fixed](int, const DualState&) { return fixed; };
  } else {
    if (model.num_constraints() == 0)
      throw ParameterError("the theorem schedule needs at least one constraint");
    const CmdpModel* sm = solved;
    const int K = config.macro_steps;
    const double ep = config.eta_prime;
    s.schedule = [sm, K, ep, alpha, eta](int, const DualState& d) {
      const double ck = inner_constant(*sm, ep, d.lambda_l1());
      const double raw = std::log(3.0 * K * ck) / (eta * alpha);
      return static_cast<int>(std::ceil(std::max(raw, 1.0)));
    };
  }
  if (solved != &model) {
    ExactOracle shifted_oracle(*solved);
    ValueOracle& use = oracle.exact() ? static_cast<ValueOracle&>(shifted_oracle) : oracle;
    return detail::run_macro_loop(*solved, model, s, use, observer);
  }
  return detail::run_macro_loop(model, model, s, oracle, observer);
}

RunHistory run_pmd_pd(const CmdpModel& model, const PmdPdConfig& config,
                      const std::optional<RunReference>& reference) {
  ExactOracle oracle(model);
  return run_pmd_pd(model, config, oracle, reference);
}

int zero_violation_min_steps(const CmdpModel& model, const PmdPdConfig& config) {
  if (!config.xi) throw ParameterError("zero-violation mode requires xi");
  const auto [alpha, eta] = resolve_step_sizes(model, config);
  (void)eta;
  const double b = pessimism_b(*config.xi, config.eta_prime, alpha, model.gamma,
                               model.num_constraints(), model.num_actions);
  return static_cast<int>(std::ceil(2.0 * b / *config.xi - 1e-12));
}

RunHistory run_pmd_pd_zero(const CmdpModel& model, const PmdPdConfig& config,
                           const std::optional<RunReference>& reference) {
  const int k_min = zero_violation_min_steps(model, config);
  if (config.macro_steps < k_min)
    throw ParameterError("zero-violation mode needs K >= 2b/xi = " + std::to_string(k_min) +
                         ", got " + std::to_string(config.macro_steps));
  const auto [alpha, eta] = resolve_step_sizes(model, config);
  (void)eta;
  const double b = pessimism_b(*config.xi, config.eta_prime, alpha, model.gamma,
                               model.num_constraints(), model.num_actions);
  PmdPdConfig c = config;
  c.pessimism = b / config.macro_steps;
  // The multipliers of the tightened problem differ from lambda*; only the
  // optimal value of the original problem is kept for the gap column.
  std::optional<RunReference> ref;
  if (reference) ref = RunReference{reference->optimal_value, Eigen::VectorXd()};
  ExactOracle unused(model);
  RunHistory h = run_pmd_pd(model, c, unused, ref);
  const int m = model.num_constraints();
  for (int i = 0; i < m; ++i) {
    const double v = h.back().running_mean(i + 1);
    if (v > 0.0)
      throw AssertionFailure("zero-violation: final average violation " + std::to_string(i) +
                                 " = " + fmt(v) + " is positive",
                             config.macro_steps);
  }
  return h;
}

}  // namespace cmdp
