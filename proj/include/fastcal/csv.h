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

#ifndef FASTCAL_CSV_H_
#define FASTCAL_CSV_H_

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace fastcal {

// Raw cells of a comma-separated file with a header row. Blank lines are
// skipped; every data row must have as many cells as the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<size_t> line_numbers;  // 1-based source line of each row
};

absl::StatusOr<CsvTable> ReadCsvTable(std::istream& input);
absl::StatusOr<CsvTable> ReadCsvTable(const std::string& path);

// Finite decimal number, or nullopt.
std::optional<double> ParseNumber(std::string_view s);
// Shortest text that parses back to the same double.
std::string FormatNumber(double value);
std::string QuoteCsv(const std::string& s);

}  // namespace fastcal

#endif  // FASTCAL_CSV_H_
