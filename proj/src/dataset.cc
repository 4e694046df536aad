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

#include "fastcal/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "fastcal/csv.h"
#include "fastcal/rng.h"

namespace fastcal {
namespace {

// Assigns codes in first-appearance order.
std::vector<double> EncodeFirstAppearance(
    const std::vector<std::string>& cells, std::vector<std::string>* labels) {
  std::unordered_map<std::string, size_t> codes;
  std::vector<double> encoded;
  encoded.reserve(cells.size());
  for (const auto& cell : cells) {
    auto [it, inserted] = codes.emplace(cell, labels->size());
    if (inserted) labels->push_back(cell);
    encoded.push_back(static_cast<double>(it->second));
  }
  return encoded;
}

Split MakeSplit(const Dataset& dataset, const std::vector<size_t>& order,
                size_t train_size, size_t cal_size, uint64_t seed) {
  const std::span<const size_t> all(order);
  Split split;
  split.proper_training = dataset.Subset(all.subspan(0, train_size));
  split.calibration = dataset.Subset(all.subspan(train_size, cal_size));
  split.test = dataset.Subset(all.subspan(train_size + cal_size));
  split.seed = seed;
  return split;
}

std::vector<size_t> ShuffledIndices(size_t n, uint64_t seed) {
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.Shuffle(std::span<size_t>(order));
  return order;
}

}  // namespace

std::optional<size_t> Schema::FeatureIndex(const std::string& name) const {
  for (size_t f = 0; f < features.size(); ++f) {
    if (features[f].name == name) return f;
  }
  return std::nullopt;
}

std::string Schema::FormatValue(size_t f, double value) const {
  const auto& feature = features[f];
  if (feature.is_categorical()) {
    const auto code = static_cast<size_t>(value);
    if (code < feature.categories.size()) return feature.categories[code];
  }
  return FormatNumber(value);
}

absl::StatusOr<Dataset> Dataset::Create(std::shared_ptr<const Schema> schema,
                                        std::vector<double> values,
                                        std::vector<double> targets,
                                        std::vector<int64_t> row_ids) {
  if (schema == nullptr) {
    return absl::InvalidArgumentError("dataset schema is null");
  }
  const size_t num_features = schema->num_features();
  if (values.size() != targets.size() * num_features) {
    return absl::InvalidArgumentError(
        absl::StrCat("dataset has ", values.size(), " values for ",
                     targets.size(), " rows of ", num_features, " features"));
  }
  std::vector<std::string> names;
  for (const auto& feature : schema->features) names.push_back(feature.name);
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
    return absl::InvalidArgumentError("feature names must be unique");
  }
  for (size_t i = 0; i < targets.size(); ++i) {
    for (size_t f = 0; f < num_features; ++f) {
      const double v = values[i * num_features + f];
      if (!std::isfinite(v)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "row ", i, ", feature '", schema->features[f].name,
            "': non-finite value"));
      }
      const auto& feature = schema->features[f];
      if (feature.is_categorical() &&
          (v < 0 || v != std::floor(v) || v >= feature.categories.size())) {
        return absl::InvalidArgumentError(
            absl::StrCat("row ", i, ", feature '", feature.name,
                         "': invalid category code ", v));
      }
    }
    if (!std::isfinite(targets[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", i, ": non-finite target"));
    }
    if (schema->target.categorical &&
        (targets[i] < 0 || targets[i] != std::floor(targets[i]) ||
         targets[i] >= schema->target.classes.size())) {
      return absl::InvalidArgumentError(
          absl::StrCat("row ", i, ": invalid class code ", targets[i]));
    }
  }
  if (row_ids.empty()) {
    row_ids.resize(targets.size());
    std::iota(row_ids.begin(), row_ids.end(), 0);
  } else if (row_ids.size() != targets.size()) {
    return absl::InvalidArgumentError("row id count does not match rows");
  }
  return Dataset(std::move(schema), std::move(values), std::move(targets),
                 std::move(row_ids));
}

std::vector<double> Dataset::Column(size_t f) const {
  std::vector<double> column(num_rows());
  for (size_t i = 0; i < num_rows(); ++i) column[i] = value(i, f);
  return column;
}

Dataset Dataset::Subset(std::span<const size_t> rows) const {
  const size_t num_features = this->num_features();
  std::vector<double> values;
  values.reserve(rows.size() * num_features);
  std::vector<double> targets;
  targets.reserve(rows.size());
  std::vector<int64_t> row_ids;
  row_ids.reserve(rows.size());
  for (size_t r : rows) {
    const auto src = row(r);
    values.insert(values.end(), src.begin(), src.end());
    targets.push_back(targets_[r]);
    row_ids.push_back(row_ids_[r]);
  }
  return Dataset(schema_, std::move(values), std::move(targets),
                 std::move(row_ids));
}

Dataset Dataset::WithColumn(size_t f, std::span<const double> column) const {
  Dataset copy = *this;
  for (size_t i = 0; i < num_rows(); ++i) {
    copy.values_[i * num_features() + f] = column[i];
  }
  return copy;
}

absl::StatusOr<Dataset> ReadCsv(std::istream& input,
                                const CsvOptions& options) {
  auto table = ReadCsvTable(input);
  if (!table.ok()) return table.status();
  const auto& header = table->header;
  const size_t num_columns = header.size();
  if (num_columns < 2) {
    return absl::InvalidArgumentError(
        "CSV needs at least one feature column and a target column");
  }
  const size_t target_column = options.target_column.value_or(num_columns - 1);
  if (target_column >= num_columns) {
    return absl::InvalidArgumentError(absl::StrCat(
        "target column ", target_column, " out of range (", num_columns,
        " columns)"));
  }
  const auto& line_numbers = table->line_numbers;
  const size_t num_rows = table->rows.size();
  if (num_rows == 0) {
    return absl::InvalidArgumentError("CSV input has a header but no rows");
  }
  std::vector<std::vector<std::string>> columns(num_columns);
  for (size_t i = 0; i < num_rows; ++i) {
    for (size_t c = 0; c < num_columns; ++c) {
      auto& cell = table->rows[i][c];
      if (cell.empty()) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", line_numbers[i], ", column '", header[c],
                         "': missing value"));
      }
      columns[c].push_back(std::move(cell));
    }
  }

  auto schema = std::make_shared<Schema>();
  std::vector<std::vector<double>> encoded;
  for (size_t c = 0; c < num_columns; ++c) {
    if (c == target_column) continue;
    FeatureSchema feature;
    feature.name = header[c];
    std::vector<double> parsed;
    parsed.reserve(num_rows);
    bool numeric = true;
    for (const auto& cell : columns[c]) {
      const auto v = ParseNumber(cell);
      if (!v) {
        numeric = false;
        break;
      }
      parsed.push_back(*v);
    }
    const auto override_it = options.kind_overrides.find(feature.name);
    if (override_it != options.kind_overrides.end()) {
      if (override_it->second == FeatureKind::kNumeric && !numeric) {
        for (size_t i = 0; i < num_rows; ++i) {
          if (!ParseNumber(columns[c][i])) {
            return absl::InvalidArgumentError(absl::StrCat(
                "line ", line_numbers[i], ", column '", feature.name,
                "': '", columns[c][i], "' is not a number"));
          }
        }
      }
      numeric = override_it->second == FeatureKind::kNumeric;
    }
    if (numeric) {
      feature.kind = FeatureKind::kNumeric;
      encoded.push_back(std::move(parsed));
    } else {
      feature.kind = FeatureKind::kCategorical;
      encoded.push_back(EncodeFirstAppearance(columns[c], &feature.categories));
    }
    schema->features.push_back(std::move(feature));
  }

  // Target.
  schema->target.name = header[target_column];
  const auto& target_cells = columns[target_column];
  std::vector<double> targets;
  targets.reserve(num_rows);
  std::vector<std::optional<double>> numeric_targets;
  bool all_numeric = true;
  for (const auto& cell : target_cells) {
    numeric_targets.push_back(ParseNumber(cell));
    all_numeric = all_numeric && numeric_targets.back().has_value();
  }
  const bool categorical_target =
      options.target_kind == TargetKind::kCategorical ||
      (options.target_kind == TargetKind::kAuto && !all_numeric);
  if (!categorical_target) {
    for (size_t i = 0; i < num_rows; ++i) {
      if (!numeric_targets[i]) {
        return absl::InvalidArgumentError(absl::StrCat(
            "line ", line_numbers[i], ", column '", schema->target.name,
            "': target '", target_cells[i], "' is not a number"));
      }
      targets.push_back(*numeric_targets[i]);
    }
  } else {
    schema->target.categorical = true;
    auto& classes = schema->target.classes;
    if (all_numeric) {
      // Numeric class labels are ordered by value so that "0"/"1" map to
      // codes 0/1 regardless of row order.
      std::vector<std::pair<double, std::string>> distinct;
      for (size_t i = 0; i < num_rows; ++i) {
        distinct.emplace_back(*numeric_targets[i], target_cells[i]);
      }
      std::sort(distinct.begin(), distinct.end());
      for (const auto& [value, label] : distinct) {
        if (classes.empty() ||
            *ParseNumber(classes.back()) != value) {
          classes.push_back(label);
        }
      }
      for (size_t i = 0; i < num_rows; ++i) {
        const auto it = std::find_if(
            classes.begin(), classes.end(), [&](const std::string& label) {
              return *ParseNumber(label) == *numeric_targets[i];
            });
        targets.push_back(static_cast<double>(it - classes.begin()));
      }
    } else {
      targets = EncodeFirstAppearance(target_cells, &classes);
    }
  }

  std::vector<double> values;
  values.reserve(num_rows * schema->num_features());
  for (size_t i = 0; i < num_rows; ++i) {
    for (const auto& column : encoded) values.push_back(column[i]);
  }
  return Dataset::Create(std::move(schema), std::move(values),
                         std::move(targets));
}

absl::StatusOr<Dataset> LoadCsv(const std::string& path,
                                const CsvOptions& options) {
  std::ifstream input(path);
  if (!input) {
    return absl::NotFoundError(absl::StrCat("cannot open '", path, "'"));
  }
  auto dataset = ReadCsv(input, options);
  if (!dataset.ok()) {
    return absl::Status(dataset.status().code(),
                        absl::StrCat(path, ": ", dataset.status().message()));
  }
  return dataset;
}

absl::Status WriteCsv(const Dataset& dataset, std::ostream& output) {
  const Schema& schema = dataset.schema();
  std::vector<std::string> cells;
  for (const auto& feature : schema.features) {
    cells.push_back(QuoteCsv(feature.name));
  }
  cells.push_back(QuoteCsv(schema.target.name));
  output << absl::StrJoin(cells, ",") << "\n";
  for (size_t i = 0; i < dataset.num_rows(); ++i) {
    cells.clear();
    for (size_t f = 0; f < dataset.num_features(); ++f) {
      cells.push_back(QuoteCsv(schema.FormatValue(f, dataset.value(i, f))));
    }
    const double target = dataset.targets()[i];
    cells.push_back(schema.target.categorical
                        ? QuoteCsv(schema.target.classes[static_cast<size_t>(target)])
                        : FormatNumber(target));
    output << absl::StrJoin(cells, ",") << "\n";
  }
  if (!output) return absl::DataLossError("failed writing CSV output");
  return absl::OkStatus();
}

absl::Status WriteCsv(const Dataset& dataset, const std::string& path) {
  std::ofstream output(path);
  if (!output) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot open '", path, "' for writing"));
  }
  return WriteCsv(dataset, output);
}

absl::StatusOr<Split> SplitDataset(const Dataset& dataset, double train_frac,
                                   double cal_frac, uint64_t seed) {
  if (!(train_frac > 0) || !(cal_frac > 0) || !(train_frac + cal_frac < 1)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "split fractions must be positive with sum below 1 (got ", train_frac,
        ", ", cal_frac, ")"));
  }
  const size_t n = dataset.num_rows();
  const auto train_size =
      static_cast<size_t>(std::floor(static_cast<double>(n) * train_frac));
  const auto cal_size =
      static_cast<size_t>(std::floor(static_cast<double>(n) * cal_frac));
  if (train_size == 0 || cal_size == 0 || train_size + cal_size >= n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "split of ", n, " rows with fractions (", train_frac, ", ", cal_frac,
        ") leaves an empty partition"));
  }
  return MakeSplit(dataset, ShuffledIndices(n, seed), train_size, cal_size,
                   seed);
}

absl::StatusOr<Split> SplitDatasetBySize(const Dataset& dataset,
                                         size_t calibration_size,
                                         size_t test_size, uint64_t seed) {
  const size_t n = dataset.num_rows();
  if (calibration_size == 0 || test_size == 0 ||
      calibration_size + test_size >= n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "split of ", n, " rows into ", calibration_size, " calibration and ",
        test_size, " test rows leaves an empty partition"));
  }
  return MakeSplit(dataset, ShuffledIndices(n, seed),
                   n - calibration_size - test_size, calibration_size, seed);
}

}  // namespace fastcal
