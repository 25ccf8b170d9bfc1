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

#include "qmetro/cli/runner.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <system_error>

#include "qmetro/cli/experiments.hpp"
#include "qmetro/cli/parallel.hpp"
#include "qmetro/error.hpp"

namespace qmetro::cli {

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex;
  ss.width(16);
  ss.fill('0');
  ss << v;
  return ss.str();
}

}  // namespace

std::optional<std::string> process_env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

int execute(const Invocation& inv, std::ostream& log, const EnvLookup& env) {
  const std::string& name = inv.experiment;
  Config cfg;
  std::filesystem::path out_dir;
  unsigned threads = 1;
  try {
    if (!is_experiment(name)) throw ConfigError("unknown experiment '" + name + "'");
    if (inv.config_path) cfg = Config::load(*inv.config_path);
    if (cfg.has("experiment")) {
      const auto named = cfg.get_string("experiment", name);
      if (named != name) log << "note: config names experiment '" << named << "'; running '" << name << "'\n";
    }
    if (auto v = env(kEnvOutDir)) cfg.set("output.dir", *v, Source::environment);
    if (auto v = env(kEnvThreads)) cfg.set("run.threads", *v, Source::environment);
    for (const auto& [k, v] : inv.flags) cfg.set(k, v, Source::flag);
    out_dir = cfg.get_string("output.dir", "out");
    const long t = cfg.get_int("run.threads", 0);
    if (t < 0) throw ConfigError("run.threads: must be >= 0");
    threads = resolve_threads(t);
    cfg.get_int("run.seed", 0);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return exit_config;
  }

  ExperimentOutput result;
  try {
    RunContext ctx{cfg, threads, &log};
    result = run_experiment(name, ctx);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const InvalidArgument& e) {
    log << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const InvalidDimension& e) {
    log << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const TruncationLeak& e) {
    log << "config error: " << e.what() << " (raise model.dim)\n";
    return exit_config;
  } catch (const std::exception& e) {
    log << "error: " << name << ": " << e.what() << "\n";
    return exit_tolerance;
  }

  Provenance prov{name, hex64(cfg.hash()), utc_timestamp()};
  std::vector<std::string> files;
  try {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out_dir.string() + "': " + ec.message());
    write_file(out_dir / (name + ".csv"), to_csv(result.table, prov));
    files.push_back(name + ".csv");
    for (const auto& t : result.extra) {
      const std::string file = name + "-" + t.name + ".csv";
      write_file(out_dir / file, to_csv(t, prov));
      files.push_back(file);
    }
    write_file(out_dir / (name + ".svg"), render_svg(result.plot));
    files.push_back(name + ".svg");

    std::ostringstream m;
    m << "qmetro " << kVersion << "\n";
    m << "experiment = " << name << "\n";
    m << "status = " << (result.ok() ? "ok" : "tolerance_violation") << "\n";
    m << "generated = " << prov.timestamp << "\n";
    m << "config_hash = fnv1a64:" << prov.config_hash << "\n";
    m << "config_file = " << (inv.config_path ? inv.config_path->string() : std::string("none")) << "\n";
    m << "threads = " << threads << "\n";
    m << "files =";
    for (const auto& f : files) m << " " << f;
    m << "\n";
    for (const auto& w : result.warnings) m << "warning: " << w << "\n";
    for (const auto& f : result.failures) m << "failure: " << f << "\n";
    m << "\n[config]\n" << cfg.echo();
    write_file(out_dir / "run-manifest.txt", m.str());
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return exit_config;
  }

  for (const auto& w : result.warnings) log << "warning: " << w << "\n";
  for (const auto& f : result.failures) log << "FAIL: " << f << "\n";
  log << "[" << name << "] " << result.table.rows.size() << " rows, "
      << (result.ok() ? "ok" : std::to_string(result.failures.size()) + " tolerance violation(s)") << " -> "
      << out_dir.string() << "\n";
  return result.ok() ? exit_ok : exit_tolerance;
}

}  // namespace qmetro::cli
