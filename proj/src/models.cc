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

#include "fastcal/models.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fastcal/csv.h"

namespace fastcal {
namespace {

bool SameLayout(const Schema& a, const Schema& b) {
  if (&a == &b) return true;
  if (a.num_features() != b.num_features()) return false;
  for (size_t f = 0; f < a.num_features(); ++f) {
    if (a.features[f].name != b.features[f].name ||
        a.features[f].kind != b.features[f].kind) {
      return false;
    }
  }
  return true;
}

absl::Status CheckScoreRow(std::span<const double> scores, Task task,
                           const std::string& where) {
  for (double s : scores) {
    if (!std::isfinite(s)) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": non-finite score"));
    }
  }
  if (task == Task::kRegression) return absl::OkStatus();
  double sum = 0;
  for (double s : scores) {
    if (s < 0 || s > 1) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": class score ", s, " outside [0, 1]"));
    }
    sum += s;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    return absl::InvalidArgumentError(
        absl::StrCat(where, ": class scores sum to ", sum, ", expected 1"));
  }
  return absl::OkStatus();
}

}  // namespace

std::string TaskName(Task task) {
  switch (task) {
    case Task::kBinary:
      return "binary";
    case Task::kMulticlass:
      return "multiclass";
    case Task::kRegression:
      return "regression";
  }
  return "unknown";
}

absl::StatusOr<Task> InferTask(const Schema& schema) {
  if (!schema.target.categorical) return Task::kRegression;
  const size_t num_classes = schema.target.classes.size();
  if (num_classes < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("target '", schema.target.name,
                     "' has fewer than two classes"));
  }
  return num_classes == 2 ? Task::kBinary : Task::kMulticlass;
}

std::vector<double> ScoreMatrix::Column(size_t c) const {
  std::vector<double> column(rows);
  for (size_t i = 0; i < rows; ++i) column[i] = at(i, c);
  return column;
}

absl::Status ScoreProvider::CheckSchema(const Dataset& objects) const {
  if (objects.schema_ptr() == nullptr) {
    if (objects.num_rows() == 0) return absl::OkStatus();
    return absl::InvalidArgumentError("objects have no schema");
  }
  if (!SameLayout(objects.schema(), schema())) {
    return absl::InvalidArgumentError(
        "objects do not match the model's feature schema");
  }
  return absl::OkStatus();
}

absl::StatusOr<ScoreMatrix> ScoreProvider::PredictWithFeatureReplaced(
    const Dataset& base, std::span<const size_t> base_rows, size_t feature,
    std::span<const double> replacement) const {
  if (feature >= base.num_features() ||
      base_rows.size() != replacement.size()) {
    return absl::InvalidArgumentError("bad feature replacement request");
  }
  const Dataset objects =
      base.Subset(base_rows).WithColumn(feature, replacement);
  return Predict(objects);
}

absl::StatusOr<std::vector<ScoreMatrix>> ScoreProvider::PredictWithReplacements(
    const Dataset& base, std::span<const FeatureReplacement> requests) const {
  std::vector<ScoreMatrix> out;
  out.reserve(requests.size());
  for (const auto& request : requests) {
    auto scores = PredictWithFeatureReplaced(base, request.base_rows,
                                             request.feature, request.values);
    if (!scores.ok()) return scores.status();
    out.push_back(std::move(*scores));
  }
  return out;
}

absl::StatusOr<ScoreMatrix> ScoreProvider::StoredPerturbedOutputs(
    size_t /*feature*/, size_t /*rows*/) const {
  return absl::FailedPreconditionError(
      "model has no stored perturbed-calibration outputs");
}

// ---------------------------------------------------------------------------
// KnnModel

absl::StatusOr<std::unique_ptr<KnnModel>> KnnModel::Fit(
    const Dataset& train, Task task, const KnnOptions& options) {
  if (train.empty()) {
    return absl::InvalidArgumentError("cannot fit k-NN on an empty dataset");
  }
  if (options.k < 1) {
    return absl::InvalidArgumentError("k-NN requires k >= 1");
  }
  if (options.k > train.num_rows()) {
    return absl::InvalidArgumentError(
        absl::StrCat("k-NN k=", options.k, " exceeds the ", train.num_rows(),
                     " proper-training instances"));
  }
  const Schema& schema = train.schema();
  const bool classification = task != Task::kRegression;
  if (classification != schema.target.categorical) {
    return absl::InvalidArgumentError(absl::StrCat(
        "task ", TaskName(task), " does not match target '",
        schema.target.name, "'"));
  }
  auto model = std::unique_ptr<KnnModel>(new KnnModel());
  model->task_ = task;
  model->num_outputs_ = classification ? schema.target.classes.size() : 1;
  if (task == Task::kBinary && model->num_outputs_ != 2) {
    return absl::InvalidArgumentError("binary task needs exactly two classes");
  }
  model->k_ = options.k;
  model->schema_ = train.schema_ptr();
  model->train_targets_.assign(train.targets().begin(), train.targets().end());

  const size_t num_features = train.num_features();
  const size_t num_train = train.num_rows();
  const auto n = static_cast<double>(num_train);
  model->categorical_.assign(num_features, false);
  model->inv_std_.assign(num_features, 0.0);
  for (size_t f = 0; f < num_features; ++f) {
    if (schema.features[f].is_categorical()) {
      model->categorical_[f] = true;
      continue;
    }
    double sum = 0;
    for (size_t i = 0; i < num_train; ++i) sum += train.value(i, f);
    const double mean = sum / n;
    double ss = 0;
    for (size_t i = 0; i < num_train; ++i) {
      const double d = train.value(i, f) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    model->inv_std_[f] = sd > 0 ? 1.0 / sd : 0.0;
  }
  model->train_values_.resize(num_train * num_features);
  model->train_columns_.resize(num_train * num_features);
  for (size_t i = 0; i < num_train; ++i) {
    for (size_t f = 0; f < num_features; ++f) {
      const double scaled = model->Scale(f, train.value(i, f));
      model->train_values_[i * num_features + f] = scaled;
      model->train_columns_[f * num_train + i] = scaled;
    }
  }
  return model;
}

double KnnModel::Scale(size_t f, double value) const {
  return categorical_[f] ? value : value * inv_std_[f];
}

double KnnModel::FeatureTerm(size_t f, double a, double b) const {
  if (categorical_[f]) return a == b ? 0.0 : 1.0;
  const double d = a - b;
  return d * d;
}

double KnnModel::Distance(std::span<const double> a,
                          std::span<const double> b) const {
  double sum = 0;
  for (size_t f = 0; f < a.size(); ++f) {
    sum += FeatureTerm(f, Scale(f, a[f]), Scale(f, b[f]));
  }
  return std::sqrt(sum);
}

void KnnModel::Distances(std::span<const double> object,
                         std::vector<double>* out) const {
  const size_t num_features = schema_->num_features();
  const size_t num_train = train_targets_.size();
  std::vector<double> scaled(num_features);
  for (size_t f = 0; f < num_features; ++f) scaled[f] = Scale(f, object[f]);
  out->resize(num_train);
  for (size_t i = 0; i < num_train; ++i) {
    const double* t = train_values_.data() + i * num_features;
    double sum = 0;
    for (size_t f = 0; f < num_features; ++f) {
      sum += FeatureTerm(f, scaled[f], t[f]);
    }
    (*out)[i] = sum;
  }
}

void KnnModel::Aggregate(std::span<const double> distances,
                         std::vector<size_t>* scratch,
                         std::span<double> out) const {
  // The k nearest under (distance, index) order, kept sorted by insertion.
  // Rows arrive in index order, so a row displaces the current k-th only
  // with a strictly smaller distance and goes after any equal distances.
  auto& nearest = *scratch;
  nearest.resize(k_);
  size_t count = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < distances.size(); ++i) {
    const double d = distances[i];
    if (!(d < worst) && count == k_) continue;
    size_t pos = count < k_ ? count++ : k_ - 1;
    while (pos > 0 && d < distances[nearest[pos - 1]]) {
      nearest[pos] = nearest[pos - 1];
      --pos;
    }
    nearest[pos] = i;
    if (count == k_) worst = distances[nearest[k_ - 1]];
  }
  std::fill(out.begin(), out.end(), 0.0);
  if (task_ == Task::kRegression) {
    double sum = 0;
    for (size_t j = 0; j < k_; ++j) sum += train_targets_[nearest[j]];
    out[0] = sum / static_cast<double>(k_);
    return;
  }
  for (size_t j = 0; j < k_; ++j) {
    out[static_cast<size_t>(train_targets_[nearest[j]])] += 1.0;
  }
  for (double& v : out) v /= static_cast<double>(k_);
}

absl::StatusOr<ScoreMatrix> KnnModel::Predict(const Dataset& objects) const {
  if (auto status = CheckSchema(objects); !status.ok()) return status;
  ScoreMatrix scores(objects.num_rows(), num_outputs_);
  std::vector<double> distances;
  std::vector<size_t> scratch;
  for (size_t i = 0; i < objects.num_rows(); ++i) {
    Distances(objects.row(i), &distances);
    Aggregate(distances, &scratch, scores.mutable_row(i));
  }
  return scores;
}

absl::StatusOr<ScoreMatrix> KnnModel::PredictWithFeatureReplaced(
    const Dataset& base, std::span<const size_t> base_rows, size_t feature,
    std::span<const double> replacement) const {
  const FeatureReplacement request{feature, base_rows, replacement};
  auto scores = PredictWithReplacements(base, {&request, 1});
  if (!scores.ok()) return scores.status();
  return std::move(scores->front());
}

absl::StatusOr<std::vector<ScoreMatrix>> KnnModel::PredictWithReplacements(
    const Dataset& base, std::span<const FeatureReplacement> requests) const {
  if (auto status = CheckSchema(base); !status.ok()) return status;
  for (const auto& request : requests) {
    if (request.feature >= base.num_features() ||
        request.base_rows.size() != request.values.size()) {
      return absl::InvalidArgumentError("bad feature replacement request");
    }
    for (size_t r : request.base_rows) {
      if (r >= base.num_rows()) {
        return absl::OutOfRangeError("base row index out of range");
      }
    }
  }
  const size_t num_train = train_targets_.size();
  std::vector<std::vector<double>> base_distances(base.num_rows());
  std::vector<double> distances(num_train);
  std::vector<size_t> scratch;
  std::vector<ScoreMatrix> out;
  out.reserve(requests.size());
  for (const auto& request : requests) {
    const size_t feature = request.feature;
    const std::span<const double> column(
        train_columns_.data() + feature * num_train, num_train);
    ScoreMatrix scores(request.base_rows.size(), num_outputs_);
    for (size_t j = 0; j < request.base_rows.size(); ++j) {
      const size_t r = request.base_rows[j];
      auto& full = base_distances[r];
      if (full.empty()) Distances(base.row(r), &full);
      const double original = base.value(r, feature);
      const double value = request.values[j];
      if (value == original) {
        Aggregate(full, &scratch, scores.mutable_row(j));
        continue;
      }
      const double a = Scale(feature, original);
      const double b = Scale(feature, value);
      if (categorical_[feature]) {
        for (size_t i = 0; i < num_train; ++i) {
          distances[i] = (full[i] - (a == column[i] ? 0.0 : 1.0)) +
                         (b == column[i] ? 0.0 : 1.0);
        }
      } else {
        for (size_t i = 0; i < num_train; ++i) {
          const double da = a - column[i];
          const double db = b - column[i];
          distances[i] = (full[i] - da * da) + db * db;
        }
      }
      Aggregate(distances, &scratch, scores.mutable_row(j));
    }
    out.push_back(std::move(scores));
  }
  return out;
}

// ---------------------------------------------------------------------------
// ExternalScores

ExternalScores::ExternalScores(std::shared_ptr<const Schema> schema, Task task,
                               size_t num_outputs,
                               std::map<int64_t, std::vector<double>> table)
    : schema_(std::move(schema)),
      task_(task),
      num_outputs_(num_outputs),
      table_(std::move(table)) {}

absl::StatusOr<std::unique_ptr<ExternalScores>> ExternalScores::Load(
    const std::string& path, std::shared_ptr<const Schema> schema, Task task) {
  auto table = ReadCsvTable(path);
  if (!table.ok()) return table.status();
  const size_t expected =
      task == Task::kRegression ? 1 : schema->target.classes.size();
  if (table->header.size() != expected + 1) {
    return absl::InvalidArgumentError(absl::StrCat(
        path, ": expected a row column and ", expected,
        " score column(s), found ", table->header.size(), " columns"));
  }
  std::map<int64_t, std::vector<double>> scores;
  for (size_t i = 0; i < table->rows.size(); ++i) {
    const auto& cells = table->rows[i];
    const std::string where =
        absl::StrCat(path, " line ", table->line_numbers[i]);
    const auto row = ParseNumber(cells[0]);
    if (!row || *row < 0 || *row != std::floor(*row)) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": bad row index '", cells[0], "'"));
    }
    std::vector<double> values;
    for (size_t c = 1; c < cells.size(); ++c) {
      const auto v = ParseNumber(cells[c]);
      if (!v) {
        return absl::InvalidArgumentError(absl::StrCat(
            where, ", column '", table->header[c], "': not a number"));
      }
      values.push_back(*v);
    }
    if (auto status = CheckScoreRow(values, task, where); !status.ok()) {
      return status;
    }
    if (!scores.emplace(static_cast<int64_t>(*row), std::move(values)).second) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": duplicate row index ", cells[0]));
    }
  }
  return std::make_unique<ExternalScores>(std::move(schema), task, expected,
                                          std::move(scores));
}

absl::StatusOr<ScoreMatrix> ExternalScores::Predict(
    const Dataset& objects) const {
  if (auto status = CheckSchema(objects); !status.ok()) return status;
  ScoreMatrix scores(objects.num_rows(), num_outputs_);
  for (size_t i = 0; i < objects.num_rows(); ++i) {
    const int64_t id = objects.row_ids()[i];
    const auto it = table_.find(id);
    if (it == table_.end()) {
      return absl::NotFoundError(
          absl::StrCat("no external score for data row ", id));
    }
    std::copy(it->second.begin(), it->second.end(),
              scores.mutable_row(i).begin());
  }
  return scores;
}

absl::Status ExternalScores::LoadPerturbed(const std::string& path) {
  auto table = ReadCsvTable(path);
  if (!table.ok()) return table.status();
  if (table->header.size() != num_outputs_ + 2) {
    return absl::InvalidArgumentError(absl::StrCat(
        path, ": expected feature, row and ", num_outputs_,
        " score column(s)"));
  }
  std::map<size_t, std::map<size_t, std::vector<double>>> by_feature;
  for (size_t i = 0; i < table->rows.size(); ++i) {
    const auto& cells = table->rows[i];
    const std::string where =
        absl::StrCat(path, " line ", table->line_numbers[i]);
    std::optional<size_t> feature = schema_->FeatureIndex(cells[0]);
    if (!feature) {
      const auto index = ParseNumber(cells[0]);
      if (index && *index >= 0 && *index == std::floor(*index) &&
          *index < schema_->num_features()) {
        feature = static_cast<size_t>(*index);
      }
    }
    if (!feature) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": unknown feature '", cells[0], "'"));
    }
    const auto row = ParseNumber(cells[1]);
    if (!row || *row < 0 || *row != std::floor(*row)) {
      return absl::InvalidArgumentError(
          absl::StrCat(where, ": bad row index '", cells[1], "'"));
    }
    std::vector<double> values;
    for (size_t c = 2; c < cells.size(); ++c) {
      const auto v = ParseNumber(cells[c]);
      if (!v) {
        return absl::InvalidArgumentError(absl::StrCat(
            where, ", column '", table->header[c], "': not a number"));
      }
      values.push_back(*v);
    }
    if (auto status = CheckScoreRow(values, task_, where); !status.ok()) {
      return status;
    }
    by_feature[*feature][static_cast<size_t>(*row)] = std::move(values);
  }
  for (auto& [feature, rows] : by_feature) {
    ScoreMatrix matrix(rows.size(), num_outputs_);
    size_t expected_row = 0;
    for (auto& [row, values] : rows) {
      if (row != expected_row) {
        return absl::InvalidArgumentError(absl::StrCat(
            path, ": perturbed rows of feature ", feature,
            " are not contiguous from 0 (missing row ", expected_row, ")"));
      }
      std::copy(values.begin(), values.end(),
                matrix.mutable_row(row).begin());
      ++expected_row;
    }
    perturbed_[feature] = std::move(matrix);
  }
  return absl::OkStatus();
}

void ExternalScores::SetPerturbed(size_t feature, ScoreMatrix scores) {
  perturbed_[feature] = std::move(scores);
}

bool ExternalScores::HasPerturbed(size_t feature) const {
  return perturbed_.contains(feature);
}

absl::StatusOr<ScoreMatrix> ExternalScores::StoredPerturbedOutputs(
    size_t feature, size_t rows) const {
  const auto it = perturbed_.find(feature);
  if (it == perturbed_.end()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "external scores have no perturbed-calibration outputs for feature '",
        schema_->features[feature].name,
        "'; export the perturbed calibration set, score it and pass the "
        "perturbed score file, or use a built-in model"));
  }
  if (it->second.rows != rows) {
    return absl::FailedPreconditionError(absl::StrCat(
        "perturbed scores for feature '", schema_->features[feature].name,
        "' have ", it->second.rows, " rows, expected ", rows,
        " (scale factor times calibration size)"));
  }
  return it->second;
}

}  // namespace fastcal
