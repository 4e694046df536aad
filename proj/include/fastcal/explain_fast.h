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

#ifndef FASTCAL_EXPLAIN_FAST_H_
#define FASTCAL_EXPLAIN_FAST_H_

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "absl/status/statusor.h"
#include "fastcal/calibrator.h"
#include "fastcal/dataset.h"
#include "fastcal/explanation.h"
#include "fastcal/models.h"
#include "fastcal/perturb.h"

namespace fastcal {

struct FastExplainerOptions {
  PerturbConfig perturb;
  CalibrationOptions calibration;
};

// Explainer that moves all perturbation work to initialization.
//
// Create() stacks k copies of the calibration set, and for every feature f
// replaces the k copies of f with a perturbed column, runs the model on the
// result and builds a calibrator C_f from those outputs and the (repeated)
// calibration targets. A base calibrator C is built from the unperturbed
// calibration set. Explaining an instance then needs one model call: the
// calibrated prediction comes from C and each feature weight is the
// difference between C and C_f evaluated on the same model output.
//
// Immutable after construction; Explain is safe to call concurrently.
class FastExplainer {
 public:
  static absl::StatusOr<FastExplainer> Create(
      std::shared_ptr<const ScoreProvider> model, const Dataset& calibration,
      const FastExplainerOptions& options);

  absl::StatusOr<Explanation> Explain(const Dataset& objects,
                                      size_t row) const;
  // One batched model call; `jobs` > 1 spreads calibration over threads.
  absl::StatusOr<std::vector<Explanation>> ExplainBatch(
      const Dataset& objects, size_t jobs = 1) const;

  // Explanation from an already computed model output for `objects.row(row)`.
  Explanation ExplainOutput(const Dataset& objects, size_t row,
                            std::span<const double> output) const;

  ExplanationKind kind() const { return base_.kind(); }
  size_t num_features() const { return feature_calibrators_.size(); }
  const FastExplainerOptions& options() const { return options_; }
  const TaskCalibrator& base_calibrator() const { return base_; }
  const TaskCalibrator& feature_calibrator(size_t f) const {
    return feature_calibrators_[f];
  }
  // Rows each per-feature calibrator was built on (k * q).
  size_t perturbed_rows() const { return perturbed_rows_; }
  double init_seconds() const { return init_seconds_; }

 private:
  FastExplainer() = default;

  std::shared_ptr<const ScoreProvider> model_;
  std::shared_ptr<const Schema> schema_;
  FastExplainerOptions options_;
  TaskCalibrator base_;
  std::vector<TaskCalibrator> feature_calibrators_;
  size_t perturbed_rows_ = 0;
  double init_seconds_ = 0;
};

// Picks the class to explain: argmax of the base-calibrated one-vs-rest
// estimate, lowest class index on ties. Binary tasks always explain class 1.
size_t ChoosePositiveClass(const TaskCalibrator& base,
                           std::span<const double> output, uint64_t key);

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
void ParallelFor(size_t n, size_t jobs, const std::function<void(size_t)>& fn);

}  // namespace fastcal

#endif  // FASTCAL_EXPLAIN_FAST_H_
