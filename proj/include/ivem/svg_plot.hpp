#pragma once

#include <string>
#include <vector>

namespace ivem {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  /// Fitted slope and the number of trailing points it used; the line is
  /// drawn through their centroid in log space. fit_points = 0 hides it.
  double slope = 0.0;
  int fit_points = 0;
  /// Optimal rate, drawn as a reference triangle near the last point.
  double reference_slope = 0.0;
};

/// Static log-log plot as a standalone SVG document.
std::string loglog_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<PlotSeries>& series);

}  // namespace ivem
