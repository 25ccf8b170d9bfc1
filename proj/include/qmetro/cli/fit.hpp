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

#include <span>

namespace qmetro::cli {

/// Ordinary least squares y = intercept + slope x.
struct LinearFit {
  double slope = 0, intercept = 0;
  double slope_stderr = 0;
  double ci95_low = 0, ci95_high = 0;  // Student t, n - 2 degrees of freedom
  double r2 = 0;
  std::size_t points = 0;
};

/// Needs at least three points with distinct x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace qmetro::cli
