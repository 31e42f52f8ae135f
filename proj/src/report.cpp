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

#include "citypulse/report.hpp"

#include <algorithm>
#include <cmath>

#include "citypulse/csv.hpp"

namespace citypulse {

namespace {

using L = ChartLayout;

std::string num(double v) { return format_fixed(std::abs(v) < 0.005 ? 0.0 : v, 2); }

std::string open_svg(const std::string& title) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\" width=\"800\" height=\"500\">\n";
  s += "<title>" + xml_escape(title) + "</title>\n";
  s += "<rect class=\"background\" x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
  s += "<text class=\"title\" x=\"400\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" + xml_escape(title) +
       "</text>\n";
  return s;
}

std::string axes(const ChartFrame& f, const std::string& x_label, const std::string& y_label) {
  std::string s;
  s += "<line class=\"axis\" x1=\"" + num(L::kPlotLeft) + "\" y1=\"" + num(L::kPlotBottom) + "\" x2=\"" +
       num(L::kPlotRight) + "\" y2=\"" + num(L::kPlotBottom) + "\" stroke=\"black\"/>\n";
  s += "<line class=\"axis\" x1=\"" + num(L::kPlotLeft) + "\" y1=\"" + num(L::kPlotTop) + "\" x2=\"" +
       num(L::kPlotLeft) + "\" y2=\"" + num(L::kPlotBottom) + "\" stroke=\"black\"/>\n";
  // Five y ticks over the domain.
  for (int i = 0; i <= 4; ++i) {
    const double v = f.y.lo() + (f.y.hi() - f.y.lo()) * i / 4.0;
    const double y = f.y(v);
    s += "<line class=\"tick\" x1=\"" + num(L::kPlotLeft - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(L::kPlotLeft) +
         "\" y2=\"" + num(y) + "\" stroke=\"black\"/>\n";
    s += "<text class=\"tick-label\" x=\"" + num(L::kPlotLeft - 8) + "\" y=\"" + num(y + 4) +
         "\" text-anchor=\"end\" font-size=\"10\">" + format_double(std::round(v * 100) / 100) + "</text>\n";
  }
  if (!x_label.empty()) {
    s += "<text class=\"axis-label\" x=\"" + num((L::kPlotLeft + L::kPlotRight) / 2) + "\" y=\"" +
         num(L::kHeight - 15) + "\" text-anchor=\"middle\" font-size=\"12\">" + xml_escape(x_label) + "</text>\n";
  }
  if (!y_label.empty()) {
    s += "<text class=\"axis-label\" x=\"15\" y=\"" + num((L::kPlotTop + L::kPlotBottom) / 2) +
         "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 15 " +
         num((L::kPlotTop + L::kPlotBottom) / 2) + ")\">" + xml_escape(y_label) + "</text>\n";
  }
  return s;
}

std::string category_label(double x, const std::string& text) {
  return "<text class=\"category\" x=\"" + num(x) + "\" y=\"" + num(L::kPlotBottom + 16) +
         "\" text-anchor=\"middle\" font-size=\"10\">" + xml_escape(text) + "</text>\n";
}

std::string line(const char* cls, const std::string& key, double x1, double y1, double x2, double y2) {
  return std::string("<line class=\"") + cls + "\" data-key=\"" + xml_escape(key) + "\" x1=\"" + num(x1) +
         "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) + "\" stroke=\"black\"/>\n";
}

}  // namespace

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

AffineMap::AffineMap(double lo, double hi, double out_lo, double out_hi) : lo_(lo), hi_(hi), out_lo_(out_lo) {
  if (!(hi_ > lo_)) hi_ = lo_ + 1.0;
  scale_ = (out_hi - out_lo) / (hi_ - lo_);
}

ChartFrame ChartFrame::make(double x_lo, double x_hi, double y_lo, double y_hi) {
  return {AffineMap(x_lo, x_hi, L::kPlotLeft, L::kPlotRight), AffineMap(y_lo, y_hi, L::kPlotBottom, L::kPlotTop)};
}

ChartFrame box_plot_frame(const std::vector<FiveNumberSummary>& boxes) {
  double top = 0.0;
  for (const auto& b : boxes) top = std::max(top, b.max);
  return ChartFrame::make(0.0, static_cast<double>(std::max<std::size_t>(boxes.size(), 1)), 0.0,
                          top > 0.0 ? top : 1.0);
}

std::string box_plot_svg(const std::string& title, const std::vector<std::string>& categories,
                         const std::vector<FiveNumberSummary>& boxes) {
  const ChartFrame f = box_plot_frame(boxes);
  std::string s = open_svg(title) + axes(f, "", "count");
  const double slot = (L::kPlotRight - L::kPlotLeft) / static_cast<double>(std::max<std::size_t>(boxes.size(), 1));
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& b = boxes[i];
    const std::string& key = categories[i];
    const double cx = f.x(static_cast<double>(i) + 0.5);
    const double half = slot / 4.0;
    s += category_label(cx, key);
    if (b.n == 0) continue;
    s += "<rect class=\"box\" data-key=\"" + xml_escape(key) + "\" x=\"" + num(cx - half) + "\" y=\"" + num(f.y(b.q3)) +
         "\" width=\"" + num(2 * half) + "\" height=\"" + num(f.y(b.q1) - f.y(b.q3)) +
         "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    s += line("median", key, cx - half, f.y(b.median), cx + half, f.y(b.median));
    s += line("whisker-low", key, cx, f.y(b.q1), cx, f.y(b.min));
    s += line("whisker-high", key, cx, f.y(b.q3), cx, f.y(b.max));
  }
  return s + "</svg>\n";
}

std::string line_chart_svg(const std::string& title, const std::vector<std::string>& x_labels,
                           const std::vector<double>& values) {
  double top = 0.0;
  for (double v : values) top = std::max(top, v);
  const double last = values.size() > 1 ? static_cast<double>(values.size() - 1) : 1.0;
  const ChartFrame f = ChartFrame::make(0.0, last, 0.0, top > 0.0 ? top : 1.0);
  std::string s = open_svg(title) + axes(f, "date", "tweets");
  if (!values.empty()) {
    s += "<polyline class=\"series\" fill=\"none\" stroke=\"#3182bd\" points=\"";
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) s += ' ';
      s += num(f.x(static_cast<double>(i))) + "," + num(f.y(values[i]));
    }
    s += "\"/>\n";
    // At most ~10 date labels.
    const std::size_t step = std::max<std::size_t>(1, (x_labels.size() + 9) / 10);
    for (std::size_t i = 0; i < x_labels.size(); i += step) s += category_label(f.x(static_cast<double>(i)), x_labels[i]);
  }
  return s + "</svg>\n";
}

std::string scatter_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                        const std::vector<std::pair<double, double>>& points) {
  double xl = 0, xh = 1, yl = 0, yh = 1;
  if (!points.empty()) {
    xl = xh = points[0].first;
    yl = yh = points[0].second;
    for (const auto& [x, y] : points) {
      xl = std::min(xl, x);
      xh = std::max(xh, x);
      yl = std::min(yl, y);
      yh = std::max(yh, y);
    }
  }
  const ChartFrame f = ChartFrame::make(xl, xh, yl, yh);
  std::string s = open_svg(title) + axes(f, x_label, y_label);
  for (const auto& [x, y] : points) {
    s += "<circle class=\"point\" cx=\"" + num(f.x(x)) + "\" cy=\"" + num(f.y(y)) + "\" r=\"3\" fill=\"#e6550d\"/>\n";
  }
  return s + "</svg>\n";
}

std::string heatmap_svg(const std::string& title, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels, const std::vector<std::vector<double>>& values) {
  std::string s = open_svg(title);
  const std::size_t rows = values.size(), cols = col_labels.size();
  double top = 0.0;
  for (const auto& r : values) {
    for (double v : r) top = std::max(top, v);
  }
  if (rows == 0 || cols == 0) return s + "</svg>\n";
  const double w = (L::kPlotRight - L::kPlotLeft) / static_cast<double>(cols);
  const double h = (L::kPlotBottom - L::kPlotTop) / static_cast<double>(rows);
  for (std::size_t c = 0; c < cols; ++c) s += category_label(L::kPlotLeft + (c + 0.5) * w, col_labels[c]);
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = L::kPlotTop + r * h;
    if (h >= 8) {
      s += "<text class=\"row-label\" x=\"" + num(L::kPlotLeft - 6) + "\" y=\"" + num(y + h / 2 + 3) +
           "\" text-anchor=\"end\" font-size=\"" + num(std::min(10.0, h - 1)) + "\">" + xml_escape(row_labels[r]) +
           "</text>\n";
    }
    for (std::size_t c = 0; c < cols && c < values[r].size(); ++c) {
      const double t = top > 0 ? values[r][c] / top : 0.0;
      const int shade = static_cast<int>(std::lround(255 - 200 * t));
      s += "<rect class=\"cell\" x=\"" + num(L::kPlotLeft + c * w) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
           "\" height=\"" + num(h) + "\" fill=\"rgb(" + std::to_string(shade) + "," + std::to_string(shade) +
           ",255)\"><title>" + xml_escape(row_labels[r] + " " + col_labels[c] + ": " + format_fixed(values[r][c], 4)) +
           "</title></rect>\n";
    }
  }
  return s + "</svg>\n";
}

}  // namespace citypulse
