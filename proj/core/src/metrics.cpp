#include "cmdp/metrics.hpp"

#include <cmath>

#include "cmdp/errors.hpp"

namespace cmdp {

MetricSeries compute_metrics(const RunHistory& history, const GroundTruth& gt, bool reward_form) {
  if (gt.status != SolveStatus::optimal)
    throw ValidationError("compute_metrics: ground truth is not optimal");
  const int m = history.num_constraints();
  if (gt.lambda_star.size() != m)
    throw ValidationError("compute_metrics: ground truth and history disagree on m");
  MetricSeries out;
  out.violation.assign(m, {});
  out.violation_positive.assign(m, {});
  // In reward form V_r = -V_{c_0} and l_i - V_{g_i} = V_{c_i}, so the
  // min-form expressions already equal the reported quantities.
  for (const auto& r : history.records()) {
    out.t.push_back(r.k);
    out.inner_t.push_back(static_cast<double>(r.inner_cumulative));
    out.gap.push_back(r.running_mean(0) - gt.optimal_value);
    for (int i = 0; i < m; ++i) {
      const double v = r.running_mean(i + 1);
      out.violation[i].push_back(v);
      out.violation_positive[i].push_back(std::max(0.0, v));
    }
    out.reported_objective.push_back(reward_form ? -r.values(0) : r.values(0));
  }
  return out;
}

SlopeFit loglog_slope(const std::vector<double>& t, const std::vector<double>& y,
                      double window_fraction) {
  if (t.size() != y.size()) throw ValidationError("loglog_slope: length mismatch");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0))
    throw ValidationError("loglog_slope: window fraction must lie in (0, 1]");
  const std::size_t n = t.size();
  const std::size_t start = n - static_cast<std::size_t>(std::floor(window_fraction * n));
  std::vector<double> xs, ys;
  for (std::size_t i = start; i < n; ++i)
    if (y[i] > 0.0 && t[i] > 0.0) {
      xs.push_back(std::log10(t[i]));
      ys.push_back(std::log10(y[i]));
    }
  if (xs.size() < 10)
    throw ValidationError("loglog_slope: only " + std::to_string(xs.size()) +
                          " positive points in the window (need 10)");
  const double k = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0.0) throw ValidationError("loglog_slope: degenerate abscissae");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  f.t_lo = t[start];
  f.t_hi = t[n - 1];
  f.points = static_cast<int>(xs.size());
  return f;
}

}  // namespace cmdp
