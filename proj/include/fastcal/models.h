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

#ifndef FASTCAL_MODELS_H_
#define FASTCAL_MODELS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "fastcal/dataset.h"

namespace fastcal {

enum class Task { kBinary, kMulticlass, kRegression };

std::string TaskName(Task task);

// Row-major model outputs: one row per object, one column per class
// (classification) or a single prediction column (regression).
struct ScoreMatrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> values;

  ScoreMatrix() = default;
  ScoreMatrix(size_t rows, size_t cols)
      : rows(rows), cols(cols), values(rows * cols, 0.0) {}

  std::span<const double> row(size_t i) const {
    return {values.data() + i * cols, cols};
  }
  std::span<double> mutable_row(size_t i) {
    return {values.data() + i * cols, cols};
  }
  double at(size_t i, size_t c) const { return values[i * cols + c]; }
  std::vector<double> Column(size_t c) const;
};

// One feature-replacement request: copies of `base_rows` with `feature` set
// to the matching entry of `values`.
struct FeatureReplacement {
  size_t feature = 0;
  std::span<const size_t> base_rows;
  std::span<const double> values;
};

// The underlying model h. Implementations are immutable after construction
// and Predict is safe to call concurrently.
class ScoreProvider {
 public:
  virtual ~ScoreProvider() = default;

  virtual Task task() const = 0;
  // 2 for binary, C for multiclass, 1 for regression.
  virtual size_t num_outputs() const = 0;
  virtual const Schema& schema() const = 0;

  // False when the provider can only answer for objects it has stored
  // outputs for (external score tables).
  virtual bool EvaluatesArbitraryObjects() const { return true; }

  virtual absl::StatusOr<ScoreMatrix> Predict(const Dataset& objects) const = 0;

  // Outputs for copies of `base` rows `base_rows[j]` with feature `feature`
  // set to `replacement[j]`. The default materializes the objects and calls
  // Predict; models may override with a cheaper path.
  virtual absl::StatusOr<ScoreMatrix> PredictWithFeatureReplaced(
      const Dataset& base, std::span<const size_t> base_rows, size_t feature,
      std::span<const double> replacement) const;

  // One ScoreMatrix per request, all over the same base objects. The default
  // answers each request with PredictWithFeatureReplaced.
  virtual absl::StatusOr<std::vector<ScoreMatrix>> PredictWithReplacements(
      const Dataset& base, std::span<const FeatureReplacement> requests) const;

  // Outputs for perturbed calibration objects supplied out of band (the
  // `rows` multiplied rows of feature `feature`). Used when
  // EvaluatesArbitraryObjects() is false; the default has none.
  virtual absl::StatusOr<ScoreMatrix> StoredPerturbedOutputs(
      size_t feature, size_t rows) const;

 protected:
  absl::Status CheckSchema(const Dataset& objects) const;
};

struct KnnOptions {
  size_t k = 10;
};

// k-nearest-neighbour classifier/regressor.
//
// Distance: squared Euclidean over numeric features standardized with the
// proper-training mean and population standard deviation (zero-variance
// features contribute nothing) plus a 0/1 mismatch per categorical feature.
// Ties in distance are broken by the lower training row index.
class KnnModel : public ScoreProvider {
 public:
  static absl::StatusOr<std::unique_ptr<KnnModel>> Fit(const Dataset& train,
                                                       Task task,
                                                       const KnnOptions& options);

  Task task() const override { return task_; }
  size_t num_outputs() const override { return num_outputs_; }
  const Schema& schema() const override { return *schema_; }
  size_t k() const { return k_; }

  absl::StatusOr<ScoreMatrix> Predict(const Dataset& objects) const override;
  absl::StatusOr<ScoreMatrix> PredictWithFeatureReplaced(
      const Dataset& base, std::span<const size_t> base_rows, size_t feature,
      std::span<const double> replacement) const override;
  // Full distances of each base row are computed once and shared by all
  // requests; a replaced object then costs one pass over one feature column.
  absl::StatusOr<std::vector<ScoreMatrix>> PredictWithReplacements(
      const Dataset& base,
      std::span<const FeatureReplacement> requests) const override;

  // Distance between two objects in the model's metric (not squared).
  double Distance(std::span<const double> a, std::span<const double> b) const;

 private:
  KnnModel() = default;

  // Numeric values are stored divided by their standard deviation.
  double Scale(size_t f, double value) const;
  // Squared contribution of feature f between two scaled values.
  double FeatureTerm(size_t f, double a, double b) const;
  // Squared distances from `object` to every training row.
  void Distances(std::span<const double> object, std::vector<double>* out) const;
  void Aggregate(std::span<const double> distances,
                 std::vector<size_t>* scratch, std::span<double> out) const;

  Task task_ = Task::kBinary;
  size_t num_outputs_ = 0;
  size_t k_ = 0;
  std::shared_ptr<const Schema> schema_;
  std::vector<double> train_values_;   // row-major, scaled
  std::vector<double> train_columns_;  // column-major copy
  std::vector<bool> categorical_;
  std::vector<double> train_targets_;
  std::vector<double> inv_std_;  // 0 for zero-variance features
};

// Precomputed outputs keyed by source row id (the data row index of the
// dataset file). Optionally holds outputs for perturbed calibration objects,
// keyed by (feature index, multiplied row index).
class ExternalScores : public ScoreProvider {
 public:
  ExternalScores(std::shared_ptr<const Schema> schema, Task task,
                 size_t num_outputs, std::map<int64_t, std::vector<double>> table);

  // Reads "row,<score columns...>". Classification files carry one column per
  // class in class-code order; regression files carry one prediction column.
  static absl::StatusOr<std::unique_ptr<ExternalScores>> Load(
      const std::string& path, std::shared_ptr<const Schema> schema, Task task);

  Task task() const override { return task_; }
  size_t num_outputs() const override { return num_outputs_; }
  const Schema& schema() const override { return *schema_; }
  bool EvaluatesArbitraryObjects() const override { return false; }

  absl::StatusOr<ScoreMatrix> Predict(const Dataset& objects) const override;

  // Perturbed tables: "feature,row,<score columns...>".
  absl::Status LoadPerturbed(const std::string& path);
  void SetPerturbed(size_t feature, ScoreMatrix scores);
  bool HasPerturbed(size_t feature) const;

  absl::StatusOr<ScoreMatrix> StoredPerturbedOutputs(
      size_t feature, size_t rows) const override;

 private:
  std::shared_ptr<const Schema> schema_;
  Task task_;
  size_t num_outputs_;
  std::map<int64_t, std::vector<double>> table_;
  std::map<size_t, ScoreMatrix> perturbed_;
};

// Task implied by a dataset's target: categorical with 2 classes is binary,
// more classes is multiclass, numeric is regression.
absl::StatusOr<Task> InferTask(const Schema& schema);

}  // namespace fastcal

#endif  // FASTCAL_MODELS_H_
