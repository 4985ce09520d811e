#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

namespace cmdp {

/// Row-stochastic policy over a finite MDP, held as normalised log-probabilities.
/// Every row log-sum-exps to zero and every log-probability is finite.
class TabularPolicy {
 public:
  TabularPolicy() = default;

  /// Normalises each row of `logits` with a max-shifted log-sum-exp.
  static TabularPolicy from_logits(const Eigen::MatrixXd& logits);
  /// Requires strictly positive entries; rows are renormalised.
  static TabularPolicy from_probabilities(const Eigen::MatrixXd& probs);

  int num_states() const { return static_cast<int>(log_probs_.rows()); }
  int num_actions() const { return static_cast<int>(log_probs_.cols()); }

  const Eigen::MatrixXd& log_probs() const { return log_probs_; }
  Eigen::MatrixXd probabilities() const { return log_probs_.array().exp().matrix(); }
  double prob(int s, int a) const { return std::exp(log_probs_(s, a)); }
  double log_prob(int s, int a) const { return log_probs_(s, a); }

  /// Hash of the exact bit pattern of the log-probabilities.
  std::uint64_t fingerprint() const;

 private:
  explicit TabularPolicy(Eigen::MatrixXd log_probs) : log_probs_(std::move(log_probs)) {}
  Eigen::MatrixXd log_probs_;
};

TabularPolicy uniform_policy(int num_states, int num_actions);

/// Sum_s weights(s) * KL(pi(.|s) || ref(.|s)).
double expected_kl(const Eigen::VectorXd& state_weights, const TabularPolicy& pi,
                   const TabularPolicy& ref);

/// KL(pi(.|s) || ref(.|s)) for every state.
Eigen::VectorXd statewise_kl(const TabularPolicy& pi, const TabularPolicy& ref);

/// Softmax natural policy gradient: pi'(a|s) ∝ pi(a|s) exp(-eta q(s,a)).
TabularPolicy npg_step(const TabularPolicy& policy, const Eigen::MatrixXd& q, double eta);

/// Entropy-regularised NPG step:
///   pi'(a|s) ∝ pi(a|s)^(1 - eta alpha / (1 - gamma)) exp(-eta q_reg(s,a) / (1 - gamma)).
/// Requires 0 < eta <= (1 - gamma) / alpha.
TabularPolicy npg_entropy_step(const TabularPolicy& policy, const Eigen::MatrixXd& q_reg,
                               double alpha, double eta, double gamma);

/// Largest |log pi - log other| over all entries.
double max_log_gap(const TabularPolicy& a, const TabularPolicy& b);

}  // namespace cmdp
