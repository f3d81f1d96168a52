#include "qd/pipeline/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "qd/error.hpp"

namespace qd {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void data_range(const std::vector<PlotSeries>& series, bool x, double& lo, double& hi) {
  if (lo != hi) return;
  lo = std::numeric_limits<double>::infinity();
  hi = -lo;
  for (const auto& s : series)
    for (const auto& [px, py] : s.points) {
      double v = x ? px : py;
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
}

}  // namespace

std::string line_plot_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  double x_lo = spec.x_lo, x_hi = spec.x_hi, y_lo = spec.y_lo, y_hi = spec.y_hi;
  data_range(series, true, x_lo, x_hi);
  data_range(series, false, y_lo, y_hi);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double y) { return kTop + ph - (y - y_lo) / (y_hi - y_lo) * ph; };

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(spec.title)
     << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = x_lo + (x_hi - x_lo) * i / 5.0, fy = y_lo + (y_hi - y_lo) * i / 5.0;
    os << "<line x1=\"" << sx(fx) << "\" y1=\"" << kTop + ph << "\" x2=\"" << sx(fx) << "\" y2=\"" << kTop + ph + 5
       << "\" stroke=\"black\"/><text x=\"" << sx(fx) << "\" y=\"" << kTop + ph + 18
       << "\" text-anchor=\"middle\">" << fx << "</text>\n";
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << sy(fy) << "\" x2=\"" << kLeft << "\" y2=\"" << sy(fy)
       << "\" stroke=\"black\"/><text x=\"" << kLeft - 8 << "\" y=\"" << sy(fy) + 4 << "\" text-anchor=\"end\">" << fy
       << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
     << escape(spec.x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(spec.y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kColors[k % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : series[k].points)
      if (std::isfinite(x) && std::isfinite(y)) os << sx(x) << ',' << sy(y) << ' ';
    os << "\"/>\n";
    const double ly = kTop + 16 + 16 * static_cast<double>(k);
    os << "<line x1=\"" << kLeft + pw - 120 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw - 100 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/><text x=\"" << kLeft + pw - 95 << "\" y=\"" << ly + 4
       << "\">" << escape(series[k].name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_line_plot(const std::filesystem::path& path, const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << line_plot_svg(spec, series);
}

}  // namespace qd
