#include "ratekit/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ratekit/error.hpp"

namespace ratekit {

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

constexpr std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string render_curve_svg(const std::vector<CurveSeries>& series, const std::string& x_label,
                             const std::string& y_label) {
  if (series.empty()) throw InvalidInput("render_curve_svg: no series");
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : series) {
    if (s.points.size() < 2) throw InvalidInput("render_curve_svg: series '" + s.name + "' has fewer than 2 points");
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) throw InvalidInput("render_curve_svg: non-finite point");
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (x_max == x_min) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  if (y_max == y_min) {
    y_min -= 0.5;
    y_max += 0.5;
  }
  using L = SvgLayout;
  auto map_x = [&](double x) { return L::plot_left + (x - x_min) / (x_max - x_min) * (L::plot_right - L::plot_left); };
  auto map_y = [&](double y) { return L::plot_bottom - (y - y_min) / (y_max - y_min) * (L::plot_bottom - L::plot_top); };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(L::width) + "\" height=\"" + fixed(L::height) +
         "\" viewBox=\"0 0 " + fixed(L::width) + " " + fixed(L::height) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + fixed(L::width) + "\" height=\"" + fixed(L::height) + "\" fill=\"white\"/>\n";
  out += "<g stroke=\"black\" stroke-width=\"1\">\n";
  out += "<line x1=\"" + fixed(L::plot_left) + "\" y1=\"" + fixed(L::plot_bottom) + "\" x2=\"" + fixed(L::plot_right) +
         "\" y2=\"" + fixed(L::plot_bottom) + "\"/>\n";
  out += "<line x1=\"" + fixed(L::plot_left) + "\" y1=\"" + fixed(L::plot_bottom) + "\" x2=\"" + fixed(L::plot_left) +
         "\" y2=\"" + fixed(L::plot_top) + "\"/>\n";
  out += "</g>\n";

  out += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  out += "<text x=\"" + fixed(L::plot_left) + "\" y=\"" + fixed(L::plot_bottom + 15) + "\" text-anchor=\"middle\">" +
         tick(x_min) + "</text>\n";
  out += "<text x=\"" + fixed(L::plot_right) + "\" y=\"" + fixed(L::plot_bottom + 15) + "\" text-anchor=\"middle\">" +
         tick(x_max) + "</text>\n";
  out += "<text x=\"" + fixed(L::plot_left - 5) + "\" y=\"" + fixed(L::plot_bottom) + "\" text-anchor=\"end\">" +
         tick(y_min) + "</text>\n";
  out += "<text x=\"" + fixed(L::plot_left - 5) + "\" y=\"" + fixed(L::plot_top + 4) + "\" text-anchor=\"end\">" +
         tick(y_max) + "</text>\n";
  out += "<text x=\"" + fixed(0.5 * (L::plot_left + L::plot_right)) + "\" y=\"" + fixed(L::height - 15) +
         "\" text-anchor=\"middle\">" + escape_xml(x_label) + "</text>\n";
  out += "<text x=\"15\" y=\"" + fixed(0.5 * (L::plot_top + L::plot_bottom)) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 15 " + fixed(0.5 * (L::plot_top + L::plot_bottom)) + ")\">" +
         escape_xml(y_label) + "</text>\n";
  out += "</g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % kPalette.size()];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < series[i].points.size(); ++k) {
      if (k) out += ' ';
      out += fixed(map_x(series[i].points[k].first)) + ',' + fixed(map_y(series[i].points[k].second));
    }
    out += "\"/>\n";
    const double ly = L::plot_top + 15.0 * static_cast<double>(i + 1);
    out += "<text x=\"" + fixed(L::plot_right - 5) + "\" y=\"" + fixed(ly) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + color + "\">" +
           escape_xml(series[i].name) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace ratekit
