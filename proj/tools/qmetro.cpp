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

// qmetro: experiment runner.
//
//   qmetro <experiment> [--config file] [--out dir] [--grid.T start:stop:step]
//          [--g value] [--n-max int] [--tol value] [--set key=value ...]
//
// Exit status: 0 ok, 1 tolerance violation, 2 configuration error.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmetro/cli/config.hpp"
#include "qmetro/cli/experiments.hpp"
#include "qmetro/cli/runner.hpp"

namespace {

struct Options {
  std::string config, out, grid_T, g, n_max, tol;
  std::vector<std::string> sets;
};

void add_options(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "configuration file");
  sub->add_option("--out", o.out, "output directory (overrides " + std::string(qmetro::cli::kEnvOutDir) + ")");
  sub->add_option("--grid.T", o.grid_T, "time grid: start:stop:step or a comma list");
  sub->add_option("--g", o.g, "coupling strength (grid.g)");
  sub->add_option("--n-max", o.n_max, "largest chain length for fig2 (model.n_max)");
  sub->add_option("--tol", o.tol, "main relative tolerance (tolerance.rel)");
  sub->add_option("--set", o.sets, "any config key, key=value; repeatable");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace qmetro::cli;
  CLI::App app{"qmetro: quantum Fisher information experiments"};
  app.require_subcommand(0, 1);
  bool list_keys = false;
  app.add_flag("--list-keys", list_keys, "print every configuration key and exit");

  Options opt;
  std::vector<CLI::App*> subs;
  for (auto name : experiment_names()) {
    auto* sub = app.add_subcommand(std::string(name), "run " + std::string(name));
    add_options(sub, opt);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  if (list_keys) {
    for (const auto& k : known_keys()) std::cout << k.key << "\t" << k.help << "\n";
    return exit_ok;
  }
  Invocation inv;
  for (auto* sub : subs) {
    if (sub->parsed()) inv.experiment = sub->get_name();
  }
  if (inv.experiment.empty()) {
    std::cerr << app.help();
    return exit_config;
  }
  if (!opt.config.empty()) inv.config_path = opt.config;
  auto flag = [&](const char* key, const std::string& v) {
    if (!v.empty()) inv.flags.emplace_back(key, v);
  };
  flag("output.dir", opt.out);
  flag("grid.T", opt.grid_T);
  flag("grid.g", opt.g);
  flag("model.n_max", opt.n_max);
  flag("tolerance.rel", opt.tol);
  for (const auto& s : opt.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "config error: --set expects key=value, got '" << s << "'\n";
      return exit_config;
    }
    inv.flags.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return execute(inv, std::cerr);
}
