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

#pragma once

#include <string>
#include <vector>

namespace qmetro::cli {

struct Series {
  std::string label;
  std::vector<double> x, y;
  bool line = true;
  bool markers = false;
  bool dashed = false;
};

struct Annotation {
  double x = 0, y = 0;
  std::string text;
};

struct Plot {
  std::string title, x_label, y_label;
  bool log_x = false, log_y = false;  // base-10 axes
  std::vector<Series> series;
  std::vector<Annotation> notes;
  int width = 720, height = 480;
};

/// Standalone SVG document. Points that cannot be drawn (non-finite, or <= 0
/// on a log axis) are skipped.
std::string render_svg(const Plot& plot);

/// Tick positions in data units: decades on log axes, 1-2-5 steps otherwise.
std::vector<double> axis_ticks(double lo, double hi, bool log_axis);

}  // namespace qmetro::cli
