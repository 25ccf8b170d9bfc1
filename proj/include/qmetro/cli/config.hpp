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

// Runner configuration: a small INI-style file plus overrides.
//
//   # comment            ; also a comment
//   experiment = fig2     top-level keys have no section
//   [grid]
//   T = 0.25:10:0.25      inclusive range start:stop:step
//   g = 0.5, 1, 2         list
//   [state]
//   kind = vacuum
//
// A key is addressed as "section.key". Unknown keys are rejected.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qmetro::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Source { default_value, config_file, environment, flag };

const char* to_string(Source s);

struct KeyInfo {
  std::string_view key;
  std::string_view help;
};

/// Every accepted key with a one-line description.
const std::vector<KeyInfo>& known_keys();
bool is_known_key(std::string_view key);

/// "start:stop:step" (stop included when it lands on the grid), "a, b, c" or a
/// single number. Values are start + k step, not a running sum.
std::vector<double> parse_grid(std::string_view text);
std::vector<std::string> parse_list(std::string_view text);
double parse_double(std::string_view text, std::string_view key);
long parse_int(std::string_view text, std::string_view key);

std::uint64_t fnv1a64(std::string_view data);

class Config {
 public:
  static Config parse(std::string_view text, std::string_view origin = "<config>");
  static Config load(const std::filesystem::path& path);

  /// Later sources of equal or higher rank replace earlier ones.
  void set(std::string_view key, std::string value, Source source);
  bool has(std::string_view key) const;

  // Lookups record the value used (with its source) for the manifest echo.
  std::string get_string(std::string_view key, std::string_view fallback) const;
  double get_double(std::string_view key, double fallback) const;
  double get_positive(std::string_view key, double fallback) const;
  long get_int(std::string_view key, long fallback) const;
  std::vector<double> get_grid(std::string_view key, std::string_view fallback) const;
  std::vector<std::string> get_list(std::string_view key, std::string_view fallback) const;

  /// Effective settings, "key = value  # source", sorted by key.
  std::string echo() const;
  /// Hash of the effective settings without sources; output.dir and
  /// run.threads are left out since they do not change results.
  std::uint64_t hash() const;

 private:
  struct Entry {
    std::string value;
    Source source;
  };
  const Entry& resolve(std::string_view key, std::string_view fallback) const;

  std::map<std::string, Entry, std::less<>> entries_;
  mutable std::map<std::string, Entry, std::less<>> used_;
};

}  // namespace qmetro::cli
