#include "ivem/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace ivem {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
const char* const kDash[] = {"", "6,3", "2,3", "8,3,2,3", "4,4", "1,2"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string loglog_svg(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<PlotSeries>& series) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
      xmin = std::min(xmin, std::log10(s.x[i]));
      xmax = std::max(xmax, std::log10(s.x[i]));
      ymin = std::min(ymin, std::log10(s.y[i]));
      ymax = std::max(ymax, std::log10(s.y[i]));
    }
  }
  if (!std::isfinite(xmin)) xmin = -1, xmax = 0, ymin = -1, ymax = 0;
  xmin = std::floor(xmin - 0.05), xmax = std::ceil(xmax + 0.05);
  ymin = std::floor(ymin - 0.05), ymax = std::ceil(ymax + 0.05);
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto X = [&](double lx) { return kLeft + (lx - xmin) / (xmax - xmin) * pw; };
  const auto Y = [&](double ly) { return kTop + (ymax - ly) / (ymax - ymin) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(title) << "</text>\n";
  // Decade grid and tick labels.
  for (int d = static_cast<int>(xmin); d <= static_cast<int>(xmax); ++d) {
    o << "<line x1=\"" << fmt(X(d)) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(X(d))
      << "\" y2=\"" << fmt(kTop + ph) << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << fmt(X(d)) << "\" y=\"" << fmt(kTop + ph + 18)
      << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (int d = static_cast<int>(ymin); d <= static_cast<int>(ymax); ++d) {
    o << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(Y(d)) << "\" x2=\"" << fmt(kLeft + pw)
      << "\" y2=\"" << fmt(Y(d)) << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(Y(d) + 4)
      << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  o << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(pw)
    << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 14)
    << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << fmt(kTop + ph / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kColors[si % 6];
    const char* dash = kDash[si % 6];
    std::ostringstream pts;
    std::vector<std::pair<double, double>> logs;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
      logs.emplace_back(std::log10(s.x[i]), std::log10(s.y[i]));
    }
    for (const auto& [lx, ly] : logs) {
      o << "<circle cx=\"" << fmt(X(lx)) << "\" cy=\"" << fmt(Y(ly)) << "\" r=\"3.5\" fill=\""
        << color << "\"/>\n";
    }
    const int m = std::min<int>(s.fit_points, static_cast<int>(logs.size()));
    if (m >= 2) {
      double cx = 0, cy = 0;
      for (int i = static_cast<int>(logs.size()) - m; i < static_cast<int>(logs.size()); ++i) {
        cx += logs[i].first;
        cy += logs[i].second;
      }
      cx /= m;
      cy /= m;
      const double x0 = logs.front().first, x1 = logs.back().first;
      o << "<line x1=\"" << fmt(X(x0)) << "\" y1=\"" << fmt(Y(cy + s.slope * (x0 - cx)))
        << "\" x2=\"" << fmt(X(x1)) << "\" y2=\"" << fmt(Y(cy + s.slope * (x1 - cx)))
        << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
      if (*dash) o << " stroke-dasharray=\"" << dash << "\"";
      o << "/>\n";
    }
    if (s.reference_slope > 0.0 && !logs.empty()) {
      // Slope triangle just below the finest point.
      const double bx = logs.back().first, by = logs.back().second - 0.3;
      const double w = 0.25 * (xmax - xmin) / 4.0;
      o << "<polygon points=\"" << fmt(X(bx)) << "," << fmt(Y(by)) << " " << fmt(X(bx + w)) << ","
        << fmt(Y(by)) << " " << fmt(X(bx + w)) << "," << fmt(Y(by + s.reference_slope * w))
        << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"0.8\"/>\n";
      o << "<text x=\"" << fmt(X(bx + w) + 3) << "\" y=\""
        << fmt(Y(by + 0.5 * s.reference_slope * w) + 4) << "\" fill=\"" << color << "\">"
        << fmt(s.reference_slope).substr(0, fmt(s.reference_slope).find('.')) << "</text>\n";
    }
    const double ly = kTop + 16 + 20.0 * static_cast<double>(si);
    o << "<line x1=\"" << fmt(kLeft + pw + 12) << "\" y1=\"" << fmt(ly) << "\" x2=\""
      << fmt(kLeft + pw + 40) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
      << "\" stroke-width=\"1.5\"";
    if (*dash) o << " stroke-dasharray=\"" << dash << "\"";
    o << "/>\n";
    o << "<text x=\"" << fmt(kLeft + pw + 46) << "\" y=\"" << fmt(ly + 4) << "\">" << escape(s.label);
    if (m >= 2) o << " (" << fmt(s.slope) << ")";
    o << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace ivem
