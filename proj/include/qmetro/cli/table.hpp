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
#include <string_view>
#include <variant>
#include <vector>

namespace qmetro::cli {

inline constexpr std::string_view kVersion = "0.1.0";

using Cell = std::variant<std::monostate, long long, double, std::string, bool>;

/// Column-named rows; every row repeats the parameters that produced it.
struct ResultTable {
  std::string name;  // file suffix; empty for the main table
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view col) const;
};

struct Provenance {
  std::string experiment;
  std::string config_hash;  // hex
  std::string timestamp;    // UTC, ISO 8601
};

/// Shortest string that reads back to the same double; "nan", "inf", "-inf".
std::string format_double(double v);
std::string format_cell(const Cell& c);
std::string csv_escape(std::string_view s);

/// Two '#' provenance lines (the second holds only the timestamp), then an
/// RFC 4180 header and rows with CRLF line ends.
std::string to_csv(const ResultTable& table, const Provenance& prov);

std::string utc_timestamp();

}  // namespace qmetro::cli
