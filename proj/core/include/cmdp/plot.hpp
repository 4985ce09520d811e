#pragma once

#include <string>
#include <vector>

namespace cmdp {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Static SVG line chart. On log axes, non-positive points are skipped.
std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label, bool log_axes);

}  // namespace cmdp
