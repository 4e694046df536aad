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

#ifndef FASTCAL_DATASET_H_
#define FASTCAL_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"

namespace fastcal {

enum class FeatureKind { kNumeric, kCategorical };

struct FeatureSchema {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;
  // Category labels indexed by code. Empty for numeric features.
  std::vector<std::string> categories;

  bool is_categorical() const { return kind == FeatureKind::kCategorical; }
};

struct TargetSchema {
  std::string name;
  bool categorical = false;
  // Class labels indexed by class code. Empty for numeric targets.
  std::vector<std::string> classes;
};

struct Schema {
  std::vector<FeatureSchema> features;
  TargetSchema target;

  size_t num_features() const { return features.size(); }
  std::optional<size_t> FeatureIndex(const std::string& name) const;
  // Formats a stored value of feature `f` (category label or number).
  std::string FormatValue(size_t f, double value) const;
};

// Instance-major table of feature values plus one target per row.
//
// Categorical values are stored as their category code (as a double); class
// targets are stored as their class code. `row_ids` record the data row each
// instance came from in the source file and survive subsetting, which is what
// external score tables are keyed on.
class Dataset {
 public:
  Dataset() = default;

  // Validates shapes and codes.
  static absl::StatusOr<Dataset> Create(std::shared_ptr<const Schema> schema,
                                        std::vector<double> values,
                                        std::vector<double> targets,
                                        std::vector<int64_t> row_ids = {});

  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }

  size_t num_rows() const { return targets_.size(); }
  size_t num_features() const { return schema_->num_features(); }
  bool empty() const { return targets_.empty(); }

  std::span<const double> row(size_t i) const {
    return {values_.data() + i * num_features(), num_features()};
  }
  double value(size_t i, size_t f) const {
    return values_[i * num_features() + f];
  }
  std::span<const double> values() const { return values_; }
  std::span<const double> targets() const { return targets_; }
  std::span<const int64_t> row_ids() const { return row_ids_; }

  std::vector<double> Column(size_t f) const;

  // Rows in the given order. Indices may repeat.
  Dataset Subset(std::span<const size_t> rows) const;

  // Copy with column `f` replaced. `column` must have num_rows() entries.
  Dataset WithColumn(size_t f, std::span<const double> column) const;

 private:
  Dataset(std::shared_ptr<const Schema> schema, std::vector<double> values,
          std::vector<double> targets, std::vector<int64_t> row_ids)
      : schema_(std::move(schema)),
        values_(std::move(values)),
        targets_(std::move(targets)),
        row_ids_(std::move(row_ids)) {}

  std::shared_ptr<const Schema> schema_;
  std::vector<double> values_;
  std::vector<double> targets_;
  std::vector<int64_t> row_ids_;
};

enum class TargetKind {
  // Numeric when every target cell parses as a finite number.
  kAuto,
  kNumeric,
  kCategorical,
};

struct CsvOptions {
  // Zero-based column holding the target. Defaults to the last column.
  std::optional<size_t> target_column;
  TargetKind target_kind = TargetKind::kAuto;
  // Per-column kind overrides, keyed by header name.
  std::map<std::string, FeatureKind> kind_overrides;
};

absl::StatusOr<Dataset> LoadCsv(const std::string& path,
                                const CsvOptions& options = {});
absl::StatusOr<Dataset> ReadCsv(std::istream& input,
                                const CsvOptions& options = {});

// Writes the dataset with the target as the last column. Numbers use the
// shortest representation that parses back to the same double.
absl::Status WriteCsv(const Dataset& dataset, std::ostream& output);
absl::Status WriteCsv(const Dataset& dataset, const std::string& path);

// Proper-training / calibration / test partition.
struct Split {
  Dataset proper_training;
  Dataset calibration;
  Dataset test;
  uint64_t seed = 0;
};

// Shuffles row indices (Rng(seed), Fisher-Yates) and cuts
// floor(n * train_frac) training rows, floor(n * cal_frac) calibration rows
// and the remainder as test rows.
absl::StatusOr<Split> SplitDataset(const Dataset& dataset, double train_frac,
                                   double cal_frac, uint64_t seed);

// Same shuffle, with fixed calibration and test sizes and the rest used for
// training.
absl::StatusOr<Split> SplitDatasetBySize(const Dataset& dataset,
                                         size_t calibration_size,
                                         size_t test_size, uint64_t seed);

}  // namespace fastcal

#endif  // FASTCAL_DATASET_H_
