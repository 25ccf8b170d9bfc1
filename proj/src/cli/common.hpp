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

// Helpers shared by the experiment runners.

#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "qmetro/cli/config.hpp"
#include "qmetro/models.hpp"

namespace qmetro::cli::detail {

using Osc = OscillatorState<double>;

struct StateChoice {
  std::string kind;
  Osc osc;
};

inline std::vector<StateChoice> state_choices(const Config& c, std::string_view default_kinds) {
  const auto kinds = c.get_list("state.kind", default_kinds);
  if (kinds.empty()) throw ConfigError("state.kind: need at least one state");
  std::vector<StateChoice> out;
  for (const auto& k : kinds) {
    if (k == "vacuum") {
      out.push_back({k, Osc::vacuum()});
    } else if (k == "coherent") {
      out.push_back({k, Osc::coherent({c.get_double("state.alpha", 1.0), c.get_double("state.alpha_im", 0.0)})});
    } else if (k == "squeezed") {
      out.push_back({k, Osc::squeezed(c.get_double("state.squeeze", 0.3))});
    } else {
      throw ConfigError("state.kind: unknown state '" + k + "' (vacuum, coherent, squeezed)");
    }
  }
  return out;
}

inline std::vector<double> grid(const Config& c, std::string_view key, std::string_view fallback, bool strict) {
  auto v = c.get_grid(key, fallback);
  for (double x : v) {
    if (strict ? !(x > 0) : x < 0) {
      throw ConfigError(std::string(key) + (strict ? ": values must be > 0" : ": values must be >= 0"));
    }
  }
  return v;
}

inline std::vector<int> int_grid(const Config& c, std::string_view key, std::string_view fallback) {
  std::vector<int> out;
  for (double x : c.get_grid(key, fallback)) {
    if (x < 1 || x != std::floor(x) || x > 1e6) throw ConfigError(std::string(key) + ": values must be integers >= 1");
    out.push_back(int(x));
  }
  return out;
}

inline bool increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return true;
}

inline double rel_dev(double a, double b) {
  const double d = std::abs(a - b);
  return b == 0 ? d : d / std::abs(b);
}

inline std::string join_dims(const std::vector<Index>& dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) s += (i ? "x" : "") + std::to_string(dims[i]);
  return s;
}

inline long non_negative(const Config& c, std::string_view key, long fallback) {
  const long v = c.get_int(key, fallback);
  if (v < 0) throw ConfigError(std::string(key) + ": must be >= 0");
  return v;
}

}  // namespace qmetro::cli::detail
