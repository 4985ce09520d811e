#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmdp/policy.hpp"

namespace cmdp {

/// Everything recorded after macro step k (policies pi_1 ... pi_K).
struct MacroRecord {
  int k = 0;
  long long inner_cumulative = 0;
  int inner_steps = 0;
  /// Exact (V_{c_0}, V_{c_1}, ..., V_{c_m}) of pi_k at rho, in original costs.
  Eigen::VectorXd values;
  /// lambda_k after the dual update that consumed pi_k.
  Eigen::VectorXd lambda;
  /// Running means (1/k) Sum_{tau <= k} values_tau.
  Eigen::VectorXd running_mean;
  std::uint64_t policy_fingerprint = 0;
  /// Estimated V_{c_i}(rho), i = 1..m (sample-based runs only).
  std::optional<Eigen::VectorXd> estimates;
  /// Generative-model queries so far (sample-based runs only).
  std::optional<long long> queries_cumulative;
};

class RunHistory {
 public:
  RunHistory() = default;
  RunHistory(std::string algorithm, int num_constraints)
      : algorithm_(std::move(algorithm)), num_constraints_(num_constraints) {}

  const std::string& algorithm() const { return algorithm_; }
  int num_constraints() const { return num_constraints_; }
  const std::vector<MacroRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const MacroRecord& back() const { return records_.back(); }

  /// Appends pi_k's values; k, running means and the cumulative inner count
  /// are derived from the previous record.
  MacroRecord& append(int inner_steps, Eigen::VectorXd values, Eigen::VectorXd lambda,
                      std::uint64_t policy_fingerprint = 0);

  /// Optimal objective value used for the avg_gap column.
  void set_reference_value(double v) { reference_value_ = v; }
  std::optional<double> reference_value() const { return reference_value_; }

  /// Populated only when the run was configured to keep policy snapshots.
  std::vector<TabularPolicy>& policies() { return policies_; }
  const std::vector<TabularPolicy>& policies() const { return policies_; }

  std::vector<std::string>& warnings() { return warnings_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  double average_gap(std::size_t index) const;
  double average_violation(std::size_t index, int constraint) const;

  bool has_estimates() const { return !records_.empty() && records_.front().estimates.has_value(); }

 private:
  std::string algorithm_;
  int num_constraints_ = 0;
  std::vector<MacroRecord> records_;
  std::optional<double> reference_value_;
  std::vector<TabularPolicy> policies_;
  std::vector<std::string> warnings_;
  Eigen::VectorXd value_sum_;
};

/// Header row, then one row per macro step:
///   k, T_cum, t_k, v0, v1..vm, lambda1..lambdam, avg_gap, avg_violation_1..m
/// followed by v_hat_1..m, queries_cum for sample-based histories. Decimal
/// fields use 17 significant digits; avg_gap is empty without a reference value.
void write_history_csv(const RunHistory& history, std::ostream& out);
void write_history_csv(const RunHistory& history, const std::string& path);

/// Per-step values parsed back from a CSV written by write_history_csv.
struct HistoryTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  int column(const std::string& name) const;
  std::vector<double> series(const std::string& name) const;
};
HistoryTable read_history_csv(std::istream& in);
HistoryTable read_history_csv(const std::string& path);

/// "%.17g" formatting.
std::string format_decimal(double value);

}  // namespace cmdp
