// Copyright 2026 The qmetro Authors
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

#include "qmetro/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>


namespace qmetro::cli {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string escape_xml(const std::string& s) {
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

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

struct Axis {
  bool log = false;
  double lo = 0, hi = 1;  // in transformed units
  double pixel_lo = 0, pixel_hi = 1;

  double transform(double v) const { return log ? std::log10(v) : v; }
  bool drawable(double v) const { return std::isfinite(v) && (!log || v > 0); }
  double to_pixel(double v) const { return pixel_lo + (transform(v) - lo) / (hi - lo) * (pixel_hi - pixel_lo); }
};

Axis make_axis(const std::vector<double>& values, bool log, double p0, double p1) {
  Axis a;
  a.log = log;
  a.pixel_lo = p0;
  a.pixel_hi = p1;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    if (!a.drawable(v)) continue;
    lo = std::min(lo, a.transform(v));
    hi = std::max(hi, a.transform(v));
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  const double pad = 0.04 * (hi - lo);
  a.lo = lo - pad;
  a.hi = hi + pad;
  return a;
}

std::string tick_label(double v, bool log) {
  if (log) {
    const double e = std::round(std::log10(v));
    if (std::abs(e) <= 3) return num(v);
    return "1e" + num(e);
  }
  if (std::abs(v) < 1e-12) return "0";
  return num(v);
}

}  // namespace

std::vector<double> axis_ticks(double lo, double hi, bool log_axis) {
  std::vector<double> out;
  if (!(hi > lo)) return out;
  if (log_axis) {
    const int e0 = int(std::ceil(lo - 1e-9)), e1 = int(std::floor(hi + 1e-9));
    const int stride = std::max(1, (e1 - e0 + 1 + 7) / 8);
    for (int e = e0; e <= e1; e += stride) out.push_back(std::pow(10.0, e));
    return out;
  }
  const double raw = (hi - lo) / 6;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) out.push_back(t);
  return out;
}

std::string render_svg(const Plot& plot) {
  const double left = 80, right = 170, top = 40, bottom = 60;
  const double W = plot.width, H = plot.height;
  std::vector<double> xs, ys;
  for (const auto& s : plot.series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  const Axis ax = make_axis(xs, plot.log_x, left, W - right);
  const Axis ay = make_axis(ys, plot.log_y, H - bottom, top);

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << (left + (W - right)) / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape_xml(plot.title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - right - left << "\" height=\""
    << H - bottom - top << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : axis_ticks(ax.lo, ax.hi, ax.log)) {
    const double px = ax.to_pixel(t);
    o << "<line x1=\"" << num(px) << "\" y1=\"" << top << "\" x2=\"" << num(px) << "\" y2=\"" << H - bottom
      << "\" stroke=\"#e5e5e5\"/>\n";
    o << "<text x=\"" << num(px) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\">"
      << tick_label(t, ax.log) << "</text>\n";
  }
  for (double t : axis_ticks(ay.lo, ay.hi, ay.log)) {
    const double py = ay.to_pixel(t);
    o << "<line x1=\"" << left << "\" y1=\"" << num(py) << "\" x2=\"" << W - right << "\" y2=\"" << num(py)
      << "\" stroke=\"#e5e5e5\"/>\n";
    o << "<text x=\"" << left - 6 << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\">" << tick_label(t, ay.log)
      << "</text>\n";
  }
  o << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">"
    << escape_xml(plot.x_label) << "</text>\n";
  o << "<text transform=\"translate(20," << (top + H - bottom) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape_xml(plot.y_label) << "</text>\n";

  int legend = 0;
  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const auto& s = plot.series[i];
    const char* color = kPalette[i % (sizeof kPalette / sizeof *kPalette)];
    std::ostringstream pts;
    const std::size_t count = std::min(s.x.size(), s.y.size());
    for (std::size_t k = 0; k < count; ++k) {
      if (!ax.drawable(s.x[k]) || !ay.drawable(s.y[k])) continue;
      pts << num(ax.to_pixel(s.x[k])) << ',' << num(ay.to_pixel(s.y[k])) << ' ';
      if (s.markers) {
        o << "<circle cx=\"" << num(ax.to_pixel(s.x[k])) << "\" cy=\"" << num(ay.to_pixel(s.y[k]))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    }
    if (s.line) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\""
        << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << pts.str() << "\"/>\n";
    }
    if (s.label.empty()) continue;
    const double ly = top + 14 + 18 * double(legend++);
    o << "<line x1=\"" << W - right + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - right + 30 << "\" y2=\""
      << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << W - right + 34 << "\" y=\"" << ly << "\">" << escape_xml(s.label) << "</text>\n";
  }
  for (const auto& n : plot.notes) {
    if (!ax.drawable(n.x) || !ay.drawable(n.y)) continue;
    o << "<text x=\"" << num(ax.to_pixel(n.x)) << "\" y=\"" << num(ay.to_pixel(n.y) - 8)
      << "\" text-anchor=\"middle\" font-size=\"10\">" << escape_xml(n.text) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace qmetro::cli
