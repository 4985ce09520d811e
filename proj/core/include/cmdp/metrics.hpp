#pragma once

#include <string>
#include <vector>

#include "cmdp/ground_truth.hpp"
#include "cmdp/history.hpp"

namespace cmdp {

/// Running-average optimality gap and constraint violations of a run.
struct MetricSeries {
  std::vector<double> t;
  std::vector<double> inner_t;
  std::vector<double> gap;
  /// violation[i][step], signed.
  std::vector<std::vector<double>> violation;
  std::vector<std::vector<double>> violation_positive;
  /// Objective trajectory in the units of the original problem (rewards for
  /// reward-form models, costs otherwise).
  std::vector<double> reported_objective;
};

/// gap(t) = (1/t) Sum_{tau <= t} (V_{c_0}^{pi_tau} - V*), violation_i(t) =
/// (1/t) Sum V_{c_i}^{pi_tau}. The gap equals V_r* - mean V_r for reward-form
/// models and violations equal mean (l_i - V_{g_i}).
MetricSeries compute_metrics(const RunHistory& history, const GroundTruth& gt,
                             bool reward_form = false);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

/// Least squares on (log10 t, log10 y) over the last `window_fraction` of the
/// series by index, keeping positive ordinates. Throws ValidationError when
/// fewer than 10 positive points remain.
SlopeFit loglog_slope(const std::vector<double>& t, const std::vector<double>& y,
                      double window_fraction = 0.5);

}  // namespace cmdp
