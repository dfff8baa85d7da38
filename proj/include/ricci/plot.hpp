#pragma once

#include <string>
#include <vector>

namespace ricci {

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
  /// Plot log10 y; nonpositive samples are dropped.
  bool log_y = false;
};

/// Standalone SVG line chart with axes and tick labels.
std::string render_svg(const LinePlot& plot);
void write_svg(const std::string& path, const LinePlot& plot);

}  // namespace ricci
