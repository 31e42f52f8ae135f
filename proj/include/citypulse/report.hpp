// Copyright 2026 The CityPulse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CITYPULSE_REPORT_HPP_
#define CITYPULSE_REPORT_HPP_

#include <string>
#include <utility>
#include <vector>

#include "citypulse/aggregate.hpp"

namespace citypulse {

/// Every chart uses viewBox="0 0 800 500" with the plot area inset by these
/// margins, so data occupies x in [70, 780] and y in [40, 440].
struct ChartLayout {
  static constexpr double kWidth = 800, kHeight = 500;
  static constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
  static constexpr double kPlotLeft = kLeft, kPlotRight = kWidth - kRight;
  static constexpr double kPlotTop = kTop, kPlotBottom = kHeight - kBottom;
};

/// v -> out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo). An empty domain
/// (hi <= lo) is widened to [lo, lo + 1].
class AffineMap {
 public:
  AffineMap(double lo, double hi, double out_lo, double out_hi);
  double operator()(double v) const { return out_lo_ + (v - lo_) * scale_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_, hi_, out_lo_, scale_;
};

/// Data domain to plot area: x grows to the right, y grows upwards.
struct ChartFrame {
  AffineMap x;
  AffineMap y;
  static ChartFrame make(double x_lo, double x_hi, double y_lo, double y_hi);
};

/// Box plots place category i of n at x = 70 + (i + 0.5) * 710 / n over the
/// y domain [0, largest max] ([0, 1] when every max is 0). Per category:
///   <rect class="box"> from y(q3) to y(q1), 0.5 * 710 / n wide;
///   <line class="median">, <line class="whisker-low"> y(q1)..y(min) and
///   <line class="whisker-high"> y(q3)..y(max).
/// Coordinates are written with two decimals. Every glyph carries
/// data-key with its category label.
ChartFrame box_plot_frame(const std::vector<FiveNumberSummary>& boxes);
std::string box_plot_svg(const std::string& title, const std::vector<std::string>& categories,
                         const std::vector<FiveNumberSummary>& boxes);

/// Daily counts as a <polyline class="series"> over x = day index in
/// [0, n - 1] and y in [0, largest count].
std::string line_chart_svg(const std::string& title, const std::vector<std::string>& x_labels,
                           const std::vector<double>& values);

/// One <circle class="point"> per (x, y) over the bounding range of the points.
std::string scatter_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                        const std::vector<std::pair<double, double>>& points);

/// <rect class="cell"> per value, shaded by value / largest value.
std::string heatmap_svg(const std::string& title, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels, const std::vector<std::vector<double>>& values);

std::string xml_escape(std::string_view s);

}  // namespace citypulse

#endif  // CITYPULSE_REPORT_HPP_
