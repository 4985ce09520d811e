#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cmdp/history.hpp"
#include "cmdp/model.hpp"
#include "cmdp/pmd_pd.hpp"
#include "cmdp/policy.hpp"
#include "cmdp/rng.hpp"

namespace cmdp {

/// One sampled path (s_0, a_0), ..., (s_L, a_L).
struct Trajectory {
  std::vector<int> states;
  std::vector<int> actions;
  std::size_t size() const { return states.size(); }
};

/// Start of a trajectory: a state drawn from rho, or a fixed pair.
struct TrajectoryStart {
  static TrajectoryStart from_rho() { return {}; }
  static TrajectoryStart at(int s, int a) { return {s, a}; }
  int state = -1;
  int action = -1;
  bool fixed() const { return state >= 0; }
};

/// `length` transitions after the start (length + 1 pairs in total).
Trajectory sample_trajectory(const CmdpModel& model, const TabularPolicy& policy,
                             TrajectoryStart start, int length, Engine& engine);

/// (1/M) Sum_j Sum_{l=0}^{N-1} gamma^l c(s_l, a_l) over M trajectories from rho,
/// stream j seeded by derive_seed(seed, {stream..., j}).
double estimate_v(const CmdpModel& model, const TabularPolicy& policy, const Eigen::MatrixXd& cost,
                  int m_traj, int horizon, std::uint64_t seed);

/// Same trajectories, every cost at once.
Eigen::VectorXd estimate_values(const CmdpModel& model, const TabularPolicy& policy,
                                const std::vector<Eigen::MatrixXd>& costs, int m_traj,
                                int horizon, std::uint64_t seed);

/// Monte-Carlo estimate of the regularised Q of `current` relative to anchor pi_k:
///   c~(s,a) + alpha log(1/pi_k(a|s))
///   + (1/M) Sum_j Sum_{l=1}^{N-1} gamma^l [c~(s_l,a_l) + alpha KL(current(.|s_l) || pi_k(.|s_l))].
Eigen::MatrixXd estimate_q_reg(const CmdpModel& model, const TabularPolicy& current,
                               const TabularPolicy& anchor, const Eigen::MatrixXd& cost,
                               double alpha, int m_traj, int horizon, std::uint64_t seed);

/// Leading constants of the sample-size schedule (all default to 1).
struct ScheduleConstants {
  double k = 1.0;
  double t = 1.0;
  double n_v = 1.0;
  double m_v = 1.0;
  double m_q = 1.0;
  double n_q = 1.0;
};

/// Budgets for one macro step.
struct StepBudget {
  int inner_steps = 1;
  int m_v = 1;
  int n_v = 1;
  int m_q = 1;
  int n_q = 1;
  double delta_prime = 0.0;
};

struct SampleConfig {
  double epsilon = 0.1;
  double delta_conf = 0.1;
  double eta_prime = 1.0;
  int macro_steps = 0;
  ScheduleConstants constants;
  std::uint64_t seed = 0;
  bool keep_policies = false;
};

/// Budgets for a macro step whose multipliers have l1 norm `lambda_l1`:
///   K = ceil(c_K / eps), t_k = ceil(c_t log(Lambda / eps) / (1 - gamma)),
///   N_V = ceil(log(c_N / eps) / log(1/gamma)), M_V = ceil(c_M log(1/delta') / eps^2),
///   M_Q = ceil(c_MQ (Lambda + eps t_k) log(1/delta') / eps^2),
///   N_Q = ceil(log(c_NQ Lambda / eps) / log(1/gamma)),
/// with Lambda = max(1, lambda_l1) and delta' = delta / (K (t_k + 1)).
StepBudget schedule_params(double epsilon, double delta_conf, double gamma, double lambda_l1,
                           int macro_steps, const ScheduleConstants& constants = {});

/// K = ceil(c_K / eps).
int schedule_macro_steps(double epsilon, const ScheduleConstants& constants = {});

/// Per-macro-step budgets actually used by a sample-based run.
struct SampleRunLog {
  std::vector<StepBudget> budgets;
  StepBudget initial;
  long long queries = 0;
  /// Sum over all estimator calls of M N, times |S||A| for Q estimates.
  long long closed_form_queries() const;
  int num_pairs = 0;
};

/// Sample-based PMD-PD. Values in the returned history are exact (post-hoc)
/// values of each recorded policy; estimates and cumulative queries are
/// attached per row.
RunHistory run_pmd_pd_a(const CmdpModel& model, const SampleConfig& config,
                        SampleRunLog* log = nullptr,
                        const std::optional<RunReference>& reference = std::nullopt);

/// Oracle that answers the primal-dual loop from the generative model.
class SampledOracle final : public ValueOracle {
 public:
  SampledOracle(const CmdpModel& model, const SampleConfig& config, int macro_steps);

  Eigen::VectorXd constraint_values(const TabularPolicy& policy) override;
  Eigen::MatrixXd regularized_q(const TabularPolicy& current, const TabularPolicy& anchor,
                                const Eigen::MatrixXd& cost, double alpha) override;
  void begin_macro_step(int k, const DualState& dual) override;
  bool exact() const override { return false; }
  std::optional<long long> queries() const override { return log_.queries; }

  const StepBudget& current_budget() const { return budget_; }
  const SampleRunLog& log() const { return log_; }

 private:
  const CmdpModel* model_;
  SampleConfig config_;
  int macro_steps_;
  StepBudget budget_;
  int k_ = -1;
  int t_ = 0;
  SampleRunLog log_;
};

}  // namespace cmdp
