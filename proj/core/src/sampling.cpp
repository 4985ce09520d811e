#include "cmdp/sampling.hpp"

#include <cmath>

#include "cmdp/errors.hpp"
#include "cmdp/exact_eval.hpp"

namespace cmdp {

namespace {

// Stream tags keep V and Q draws of the same step on disjoint seeds.
constexpr std::uint64_t kStreamV = 0x56;
constexpr std::uint64_t kStreamQ = 0x51;

struct Sampler {
  const CmdpModel& model;
  Eigen::MatrixXd probs;

  int next_state(int s, int a, Engine& e) const {
    return sample_index(model.transition.row(model.row(s, a)), e);
  }
  int action(int s, Engine& e) const { return sample_index(probs.row(s), e); }
};

void check_budget(int m_traj, int horizon) {
  if (m_traj < 1 || horizon < 1) throw ParameterError("estimator budgets must be positive");
}

}  // namespace

Trajectory sample_trajectory(const CmdpModel& model, const TabularPolicy& policy,
                             TrajectoryStart start, int length, Engine& engine) {
  if (length < 0) throw ParameterError("trajectory length must be nonnegative");
  const Sampler sm{model, policy.probabilities()};
  Trajectory tr;
  tr.states.reserve(length + 1);
  tr.actions.reserve(length + 1);
  int s, a;
  if (start.fixed()) {
    s = start.state;
    a = start.action;
  } else {
    s = sample_index(model.rho, engine);
    a = sm.action(s, engine);
  }
  tr.states.push_back(s);
  tr.actions.push_back(a);
  for (int l = 0; l < length; ++l) {
    s = sm.next_state(s, a, engine);
    a = sm.action(s, engine);
    tr.states.push_back(s);
    tr.actions.push_back(a);
  }
  return tr;
}

Eigen::VectorXd estimate_values(const CmdpModel& model, const TabularPolicy& policy,
                                const std::vector<Eigen::MatrixXd>& costs, int m_traj,
                                int horizon, std::uint64_t seed) {
  check_budget(m_traj, horizon);
  const Sampler sm{model, policy.probabilities()};
  const int n = static_cast<int>(costs.size());
  Eigen::VectorXd total = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd path(n);
  for (int j = 0; j < m_traj; ++j) {
    Engine e(derive_seed(seed, {static_cast<std::uint64_t>(j)}));
    int s = sample_index(model.rho, e);
    int a = sm.action(s, e);
    double disc = 1.0;
    path.setZero();
    for (int l = 0; l < horizon; ++l) {
      if (l > 0) {
        s = sm.next_state(s, a, e);
        a = sm.action(s, e);
      }
      for (int i = 0; i < n; ++i) path(i) += disc * costs[i](s, a);
      disc *= model.gamma;
    }
    total += path;
  }
  return total / m_traj;
}

double estimate_v(const CmdpModel& model, const TabularPolicy& policy, const Eigen::MatrixXd& cost,
                  int m_traj, int horizon, std::uint64_t seed) {
  return estimate_values(model, policy, {cost}, m_traj, horizon, seed)(0);
}

Eigen::MatrixXd estimate_q_reg(const CmdpModel& model, const TabularPolicy& current,
                               const TabularPolicy& anchor, const Eigen::MatrixXd& cost,
                               double alpha, int m_traj, int horizon, std::uint64_t seed) {
  check_budget(m_traj, horizon);
  const int S = model.num_states;
  const int A = model.num_actions;
  const Sampler sm{model, current.probabilities()};
  const Eigen::VectorXd kl = alpha * statewise_kl(current, anchor);
  Eigen::MatrixXd q = cost - alpha * anchor.log_probs();
  for (int s0 = 0; s0 < S; ++s0)
    for (int a0 = 0; a0 < A; ++a0) {
      double total = 0.0;
      for (int j = 0; j < m_traj; ++j) {
        Engine e(derive_seed(seed, {static_cast<std::uint64_t>(s0), static_cast<std::uint64_t>(a0),
                                    static_cast<std::uint64_t>(j)}));
        int s = s0, a = a0;
        double disc = 1.0, path = 0.0;
        for (int l = 1; l < horizon; ++l) {
          s = sm.next_state(s, a, e);
          a = sm.action(s, e);
          disc *= model.gamma;
          path += disc * (cost(s, a) + kl(s));
        }
        total += path;
      }
      q(s0, a0) += total / m_traj;
    }
  return q;
}

int schedule_macro_steps(double epsilon, const ScheduleConstants& constants) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in (0, 1)");
  return std::max(1, static_cast<int>(std::ceil(constants.k / epsilon)));
}

StepBudget schedule_params(double epsilon, double delta_conf, double gamma, double lambda_l1,
                           int macro_steps, const ScheduleConstants& c) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in (0, 1)");
  if (!(delta_conf > 0.0 && delta_conf < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("schedule needs gamma in (0, 1)");
  if (macro_steps < 1) throw ParameterError("K must be at least 1");
  const double big_l = std::max(1.0, lambda_l1);
  const double log_inv_gamma = std::log(1.0 / gamma);
  auto at_least_one = [](double x) { return std::max(1, static_cast<int>(std::ceil(x))); };
  StepBudget b;
  b.inner_steps = at_least_one(c.t * std::log(big_l / epsilon) / (1.0 - gamma));
  b.delta_prime = delta_conf / (static_cast<double>(macro_steps) * (b.inner_steps + 1));
  const double log_conf = std::log(1.0 / b.delta_prime);
  b.n_v = at_least_one(std::log(c.n_v / epsilon) / log_inv_gamma);
  b.m_v = at_least_one(c.m_v * log_conf / (epsilon * epsilon));
  b.m_q = at_least_one(c.m_q * (big_l + epsilon * b.inner_steps) * log_conf / (epsilon * epsilon));
  b.n_q = at_least_one(std::log(c.n_q * big_l / epsilon) / log_inv_gamma);
  return b;
}

long long SampleRunLog::closed_form_queries() const {
  long long total = static_cast<long long>(initial.m_v) * initial.n_v;
  for (const auto& b : budgets)
    total += static_cast<long long>(b.m_v) * b.n_v +
             static_cast<long long>(b.inner_steps) * b.m_q * b.n_q * num_pairs;
  return total;
}

SampledOracle::SampledOracle(const CmdpModel& model, const SampleConfig& config, int macro_steps)
    : model_(&model), config_(config), macro_steps_(macro_steps) {
  log_.num_pairs = model.num_pairs();
  budget_ = schedule_params(config.epsilon, config.delta_conf, model.gamma, 0.0, macro_steps,
                            config.constants);
  log_.initial = budget_;
}

void SampledOracle::begin_macro_step(int k, const DualState& dual) {
  k_ = k;
  t_ = 0;
  budget_ = schedule_params(config_.epsilon, config_.delta_conf, model_->gamma, dual.lambda_l1(),
                            macro_steps_, config_.constants);
  log_.budgets.push_back(budget_);
}

Eigen::VectorXd SampledOracle::constraint_values(const TabularPolicy& policy) {
  const StepBudget& b = k_ < 0 ? log_.initial : budget_;
  const std::uint64_t seed =
      derive_seed(config_.seed, {kStreamV, static_cast<std::uint64_t>(k_ + 1)});
  Eigen::VectorXd v =
      estimate_values(*model_, policy, model_->constraint_costs, b.m_v, b.n_v, seed);
  log_.queries += static_cast<long long>(b.m_v) * b.n_v;
  const double cap = model_->cost_scale / (1.0 - model_->gamma);
  return v.cwiseMax(-cap).cwiseMin(cap);
}

Eigen::MatrixXd SampledOracle::regularized_q(const TabularPolicy& current, const TabularPolicy& anchor,
                                             const Eigen::MatrixXd& cost, double alpha) {
  const std::uint64_t seed = derive_seed(
      config_.seed, {kStreamQ, static_cast<std::uint64_t>(k_), static_cast<std::uint64_t>(t_)});
  ++t_;
  log_.queries += static_cast<long long>(budget_.m_q) * budget_.n_q * log_.num_pairs;
  return estimate_q_reg(*model_, current, anchor, cost, alpha, budget_.m_q, budget_.n_q, seed);
}

RunHistory run_pmd_pd_a(const CmdpModel& model, const SampleConfig& config, SampleRunLog* log,
                        const std::optional<RunReference>& reference) {
  require_valid(model);
  if (model.num_constraints() < 1) throw ParameterError("PMD-PD-A needs at least one constraint");
  const int K = config.macro_steps > 0 ? config.macro_steps
                                       : schedule_macro_steps(config.epsilon, config.constants);
  const TheoremParams p = theorem_params(model, config.eta_prime, K, 0.0);
  SampledOracle oracle(model, config, K);

  detail::MacroLoopSettings s;
  s.algorithm = "pmd-pd-a";
  s.macro_steps = K;
  s.eta_prime = config.eta_prime;
  s.alpha = p.alpha;
  s.eta = p.eta;
  s.keep_policies = config.keep_policies;
  s.theorem_schedule = true;
  s.reference = reference;
  s.schedule = [&oracle](int, const DualState&) { return oracle.current_budget().inner_steps; };
  RunHistory h = detail::run_macro_loop(model, model, s, oracle, {});
  if (log) *log = oracle.log();
  return h;
}

}  // namespace cmdp
