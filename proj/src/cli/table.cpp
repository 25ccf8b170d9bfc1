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

#include "qmetro/cli/table.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <stdexcept>

namespace qmetro::cli {

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::logic_error("table " + name + ": row has " + std::to_string(row.size()) + " cells, expected " +
                           std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::size_t ResultTable::column(std::string_view col) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == col) return i;
  }
  throw std::out_of_range("table " + name + ": no column " + std::string(col));
}

double ResultTable::number(std::size_t row, std::string_view col) const {
  const Cell& c = rows.at(row).at(column(col));
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<long long>(&c)) return double(*i);
  if (const auto* b = std::get_if<bool>(&c)) return *b ? 1 : 0;
  throw std::invalid_argument("table " + name + ": column " + std::string(col) + " is not numeric");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string format_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(const std::string& v) const { return v; }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
  };
  return std::visit(Visitor{}, c);
}

std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string to_csv(const ResultTable& table, const Provenance& prov) {
  std::string out;
  out += "# qmetro " + std::string(kVersion) + " experiment=" + prov.experiment + " config=fnv1a64:" +
         prov.config_hash + "\r\n";
  out += "# generated " + prov.timestamp + "\r\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(table.columns[i]);
  }
  out += "\r\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(format_cell(row[i]));
    }
    out += "\r\n";
  }
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace qmetro::cli
