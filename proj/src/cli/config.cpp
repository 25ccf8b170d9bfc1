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

#include "qmetro/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qmetro::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (quoted) continue;
    if ((line[i] == '#' || line[i] == ';') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

const char* to_string(Source s) {
  switch (s) {
    case Source::default_value: return "default";
    case Source::config_file: return "config";
    case Source::environment: return "env";
    case Source::flag: return "flag";
  }
  return "?";
}

const std::vector<KeyInfo>& known_keys() {
  static const std::vector<KeyInfo> keys{
      {"experiment", "experiment name; the command line wins"},
      {"grid.T", "interaction times"},
      {"grid.g", "coupling strengths"},
      {"grid.f", "signal values"},
      {"grid.n", "chain lengths"},
      {"grid.a", "chain length per unit gT for the exponential bound"},
      {"grid.BT", "rotation angles for the rotated-qubit checks"},
      {"state.kind", "initial oscillator state(s): vacuum, coherent, squeezed"},
      {"state.alpha", "coherent amplitude, real part"},
      {"state.alpha_im", "coherent amplitude, imaginary part"},
      {"state.squeeze", "squeezing parameter r, Var X = exp(-2r)"},
      {"model.family", "scaling-fit family: ramsey, classical_force, chain"},
      {"model.n_max", "largest chain length scanned by fig2"},
      {"model.a", "scaling-fit chain length n = ceil(a g T)"},
      {"model.dim", "Fock truncation per oscillator, 0 = automatic"},
      {"model.fock_max_n", "chain-qfi: largest n checked in Fock space"},
      {"model.fock_max_gT", "chain-qfi: largest g T checked in Fock space"},
      {"model.fock_dims", "chain-qfi: Fock truncation per site, empty = automatic"},
      {"model.fit_T_min", "fig2: smallest T in the gap fit"},
      {"model.min_visibility", "ramsey-measure: visibility threshold for the slope fit"},
      {"model.onset_step", "chain-bound: T resolution of the onset scan"},
      {"tolerance.rel", "main relative tolerance of the experiment"},
      {"tolerance.fock_rel", "chain-qfi: Fock oracle relative tolerance"},
      {"tolerance.slope", "allowed deviation of a fitted slope"},
      {"tolerance.r2", "smallest accepted R^2 of a linear fit"},
      {"output.dir", "output directory"},
      {"run.threads", "worker threads, 0 = hardware concurrency"},
      {"run.seed", "reserved; all computations are deterministic"},
  };
  return keys;
}

bool is_known_key(std::string_view key) {
  const auto& keys = known_keys();
  return std::any_of(keys.begin(), keys.end(), [&](const KeyInfo& k) { return k.key == key; });
}

double parse_double(std::string_view text, std::string_view key) {
  text = trim(text);
  double v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(std::string(key) + ": not a finite number: '" + std::string(text) + "'");
  }
  return v;
}

long parse_int(std::string_view text, std::string_view key) {
  text = trim(text);
  long v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(std::string(key) + ": not an integer: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<double> parse_grid(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw ConfigError("grid: empty");
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError("grid: range must be start:stop:step, got '" + std::string(text) + "'");
    const double start = parse_double(parts[0], "grid start");
    const double stop = parse_double(parts[1], "grid stop");
    const double step = parse_double(parts[2], "grid step");
    if (!(step > 0)) throw ConfigError("grid: step must be > 0");
    if (stop < start) throw ConfigError("grid: stop must be >= start");
    const double span = (stop - start) / step;
    if (span > 1e6) throw ConfigError("grid: more than a million points");
    const long count = static_cast<long>(std::floor(span + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) out.push_back(start + double(k) * step);
  } else {
    for (auto item : split(text, ',')) out.push_back(parse_double(item, "grid"));
  }
  return out;
}

std::vector<std::string> parse_list(std::string_view text) {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  for (auto item : split(text, ',')) {
    if (item.empty()) throw ConfigError("list: empty item in '" + std::string(text) + "'");
    out.emplace_back(item);
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Config Config::parse(std::string_view text, std::string_view origin) {
  Config cfg;
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find('\n', start);
    const auto raw = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    start = pos == std::string_view::npos ? text.size() + 1 : pos + 1;
    ++line_no;
    const auto where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
    const auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ConfigError(where + "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    const auto name = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (name.empty()) throw ConfigError(where + "missing key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    const std::string key = section.empty() ? std::string(name) : section + "." + std::string(name);
    if (!is_known_key(key)) throw ConfigError(where + "unknown key '" + key + "'");
    if (cfg.has(key)) throw ConfigError(where + "duplicate key '" + key + "'");
    cfg.set(key, std::string(value), Source::config_file);
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void Config::set(std::string_view key, std::string value, Source source) {
  if (!is_known_key(key)) throw ConfigError("unknown key '" + std::string(key) + "'");
  auto it = entries_.find(key);
  if (it != entries_.end() && it->second.source > source) return;
  entries_[std::string(key)] = Entry{std::move(value), source};
}

bool Config::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

const Config::Entry& Config::resolve(std::string_view key, std::string_view fallback) const {
  if (!is_known_key(key)) throw ConfigError("internal: undeclared key '" + std::string(key) + "'");
  auto it = entries_.find(key);
  Entry e = it != entries_.end() ? it->second : Entry{std::string(fallback), Source::default_value};
  auto [slot, inserted] = used_.insert_or_assign(std::string(key), std::move(e));
  return slot->second;
}

std::string Config::get_string(std::string_view key, std::string_view fallback) const {
  return resolve(key, fallback).value;
}

double Config::get_double(std::string_view key, double fallback) const {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, fallback);
  return parse_double(resolve(key, std::string_view(buf, std::size_t(r.ptr - buf))).value, key);
}

double Config::get_positive(std::string_view key, double fallback) const {
  const double v = get_double(key, fallback);
  if (!(v > 0)) throw ConfigError(std::string(key) + ": must be > 0");
  return v;
}

long Config::get_int(std::string_view key, long fallback) const {
  return parse_int(resolve(key, std::to_string(fallback)).value, key);
}

std::vector<double> Config::get_grid(std::string_view key, std::string_view fallback) const {
  try {
    return parse_grid(resolve(key, fallback).value);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

std::vector<std::string> Config::get_list(std::string_view key, std::string_view fallback) const {
  return parse_list(resolve(key, fallback).value);
}

std::string Config::echo() const {
  std::string out;
  for (const auto& [k, e] : used_) out += k + " = " + e.value + "  # " + to_string(e.source) + "\n";
  for (const auto& [k, e] : entries_) {
    if (used_.find(k) == used_.end()) out += k + " = " + e.value + "  # " + to_string(e.source) + ", unused\n";
  }
  return out;
}

std::uint64_t Config::hash() const {
  std::string canon;
  for (const auto& [k, e] : used_) {
    if (k == "output.dir" || k == "run.threads") continue;  // where and how fast, not what
    canon += k + "=" + e.value + "\n";
  }
  return fnv1a64(canon);
}

}  // namespace qmetro::cli
