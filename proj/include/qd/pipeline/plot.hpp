#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace qd {

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  // Axis ranges; computed from the data when lo == hi.
  double x_lo = 0.0, x_hi = 0.0;
  double y_lo = 0.0, y_hi = 0.0;
};

// Standalone SVG line chart with axes, ticks and a legend.
std::string line_plot_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series);
void write_line_plot(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace qd
