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

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "qmetro/cli/config.hpp"
#include "qmetro/cli/svg.hpp"
#include "qmetro/cli/table.hpp"

namespace qmetro::cli {

struct RunContext {
  const Config& config;
  unsigned threads = 1;
  std::ostream* log = nullptr;  // progress; never stdout
};

struct ExperimentOutput {
  ResultTable table;               // <experiment>.csv
  std::vector<ResultTable> extra;  // <experiment>-<name>.csv
  Plot plot;
  std::vector<std::string> warnings;
  std::vector<std::string> failures;  // tolerance violations

  bool ok() const { return failures.empty(); }
};

const std::vector<std::string_view>& experiment_names();
bool is_experiment(std::string_view name);

/// Config problems throw ConfigError; numerical checks that miss their
/// tolerance land in ExperimentOutput::failures.
ExperimentOutput run_experiment(std::string_view name, const RunContext& ctx);

ExperimentOutput run_ramsey_qfi(const RunContext& ctx);
ExperimentOutput run_ramsey_measure(const RunContext& ctx);
ExperimentOutput run_chain_qfi(const RunContext& ctx);
ExperimentOutput run_chain_bound(const RunContext& ctx);
ExperimentOutput run_fig2(const RunContext& ctx);
ExperimentOutput run_scaling_fit(const RunContext& ctx);
ExperimentOutput run_validate(const RunContext& ctx);

}  // namespace qmetro::cli
