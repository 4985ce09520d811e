#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cmdp {

/// Finite constrained MDP in cost-minimisation form.
///
/// Transition probabilities are stored as a dense (|S||A|) x |S| matrix whose
/// row `s * |A| + a` is P(. | s, a). Costs are |S| x |A| matrices. The feasible
/// set is { pi : V_{c_i}^pi(rho) <= 0 for every constraint i }.
struct CmdpModel {
  int num_states = 0;
  int num_actions = 0;
  double gamma = 0.0;
  Eigen::MatrixXd transition;
  Eigen::MatrixXd objective_cost;
  std::vector<Eigen::MatrixXd> constraint_costs;
  Eigen::VectorXd rho;
  double cost_scale = 1.0;
  /// Original thresholds l_i when the model was built from a reward form.
  /// Empty for models specified directly in cost form.
  std::vector<double> thresholds;

  int num_constraints() const { return static_cast<int>(constraint_costs.size()); }
  int row(int s, int a) const { return s * num_actions + a; }
  int num_pairs() const { return num_states * num_actions; }
  bool from_reward_form() const { return !thresholds.empty(); }
};

/// One broken invariant, located at (state, action) when that applies.
struct Violation {
  std::string what;
  int state = -1;
  int action = -1;
  double magnitude = 0.0;

  std::string describe() const;
};

std::vector<Violation> validate(const CmdpModel& model);

/// Throws ValidationError listing every violation when the model is invalid.
void require_valid(const CmdpModel& model);

struct RandomCmdpSpec {
  int num_states = 20;
  int num_actions = 10;
  int num_constraints = 1;
  double gamma = 0.8;
  std::uint64_t seed = 0;
  double cost_low = -1.0;
  double cost_high = 1.0;
};

/// Transition rows ~ Dirichlet(1,...,1), costs ~ Uniform[cost_low, cost_high],
/// rho uniform. Bit-identical output for identical specs.
CmdpModel generate_random(const RandomCmdpSpec& spec);

/// Reward-form specification: maximise V_r subject to V_{g_i} >= l_i.
struct MaxFormSpec {
  Eigen::MatrixXd reward;
  std::vector<Eigen::MatrixXd> utilities;
  std::vector<double> thresholds;
};

/// Objective cost -r and constraint costs (1 - gamma) l_i - g_i, so that
/// V_{g_i} >= l_i holds exactly when V_{c_i} <= 0.
CmdpModel from_max_form(const MaxFormSpec& spec, double gamma, const Eigen::MatrixXd& transition,
                        const Eigen::VectorXd& rho);

/// Random reward-form instance: rewards and utilities ~ Uniform[0,1],
/// Dirichlet transitions, uniform rho, thresholds l_i = `threshold`.
CmdpModel generate_random_max_form(const RandomCmdpSpec& spec, double threshold);

/// The same model with every constraint cost shifted by `shift` (added).
CmdpModel shift_constraints(const CmdpModel& model, double shift);

/// Largest absolute entry across the objective and constraint costs.
double max_abs_cost(const CmdpModel& model);

void write_model(const CmdpModel& model, const std::string& path);
CmdpModel read_model(const std::string& path);
std::string model_to_json(const CmdpModel& model);
CmdpModel model_from_json(const std::string& text);

}  // namespace cmdp
