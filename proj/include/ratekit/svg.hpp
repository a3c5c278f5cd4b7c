#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ratekit {

struct CurveSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

// Fixed viewport; the data range maps onto the plot rectangle
// [plot_left, plot_right] x [plot_top, plot_bottom].
struct SvgLayout {
  static constexpr double width = 640.0;
  static constexpr double height = 480.0;
  static constexpr double plot_left = 70.0;
  static constexpr double plot_right = 620.0;
  static constexpr double plot_top = 20.0;
  static constexpr double plot_bottom = 420.0;
};

// One polyline per series plus axes, labels and a legend. Throws InvalidInput
// for series with fewer than two points or non-finite coordinates.
std::string render_curve_svg(const std::vector<CurveSeries>& series, const std::string& x_label,
                             const std::string& y_label);

}  // namespace ratekit
