/*
 * Copyright 2026 The FastCal Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fastcal/csv.h"

#include <charconv>
#include <cmath>
#include <fstream>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace fastcal {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Double-quoted cells may contain commas; a doubled quote inside a quoted
// cell is a literal quote.
absl::StatusOr<std::vector<std::string>> SplitLine(std::string_view line,
                                                   size_t line_number) {
  std::vector<std::string> cells;
  std::string cell;
  bool in_quotes = false;
  bool was_quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"' && Trim(cell).empty()) {
      cell.clear();
      in_quotes = true;
      was_quoted = true;
    } else if (c == ',') {
      cells.push_back(was_quoted ? cell : std::string(Trim(cell)));
      cell.clear();
      was_quoted = false;
    } else if (!was_quoted) {
      cell.push_back(c);
    }
  }
  if (in_quotes) {
    return absl::InvalidArgumentError(
        absl::StrCat("line ", line_number, ": unterminated quoted cell"));
  }
  cells.push_back(was_quoted ? cell : std::string(Trim(cell)));
  return cells;
}

}  // namespace

absl::StatusOr<CsvTable> ReadCsvTable(std::istream& input) {
  CsvTable table;
  std::string line;
  size_t line_number = 0;
  while (std::getline(input, line)) {
    ++line_number;
    if (Trim(line).empty()) continue;
    auto cells = SplitLine(line, line_number);
    if (!cells.ok()) return cells.status();
    if (table.header.empty()) {
      table.header = std::move(*cells);
      continue;
    }
    if (cells->size() != table.header.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_number, ": expected ",
                       table.header.size(), " cells, found ", cells->size()));
    }
    table.rows.push_back(std::move(*cells));
    table.line_numbers.push_back(line_number);
  }
  if (table.header.empty()) {
    return absl::InvalidArgumentError("CSV input is empty (no header row)");
  }
  return table;
}

absl::StatusOr<CsvTable> ReadCsvTable(const std::string& path) {
  std::ifstream input(path);
  if (!input) {
    return absl::NotFoundError(absl::StrCat("cannot open '", path, "'"));
  }
  auto table = ReadCsvTable(input);
  if (!table.ok()) {
    return absl::Status(table.status().code(),
                        absl::StrCat(path, ": ", table.status().message()));
  }
  return table;
}

std::optional<double> ParseNumber(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() ||
      !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string FormatNumber(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

std::string QuoteCsv(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos && Trim(s) == s) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace fastcal
