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

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace qmetro::cli {

enum ExitCode : int { exit_ok = 0, exit_tolerance = 1, exit_config = 2 };

/// Environment overrides, below flags and above the config file.
inline constexpr const char* kEnvOutDir = "QMETRO_OUT_DIR";
inline constexpr const char* kEnvThreads = "QMETRO_THREADS";

struct Invocation {
  std::string experiment;
  std::optional<std::filesystem::path> config_path;
  std::vector<std::pair<std::string, std::string>> flags;  // key, value
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;
std::optional<std::string> process_env(const char* name);

/// Runs one experiment and writes <out>/<experiment>.csv, extra tables as
/// <out>/<experiment>-<name>.csv, <out>/<experiment>.svg and
/// <out>/run-manifest.txt. Diagnostics and progress go to `log`.
int execute(const Invocation& inv, std::ostream& log, const EnvLookup& env = process_env);

}  // namespace qmetro::cli
