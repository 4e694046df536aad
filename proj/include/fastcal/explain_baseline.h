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

#ifndef FASTCAL_EXPLAIN_BASELINE_H_
#define FASTCAL_EXPLAIN_BASELINE_H_

#include <cstddef>
#include <memory>
#include <vector>

#include "absl/status/statusor.h"
#include "fastcal/calibrator.h"
#include "fastcal/dataset.h"
#include "fastcal/explanation.h"
#include "fastcal/models.h"

namespace fastcal {

struct BaselineExplainerOptions {
  CalibrationOptions calibration;
  size_t num_bins = 10;
};

// Decile discretization of one numeric calibration column. Bin b covers
// (edges[b-1], edges[b]] with open outer ends; every bin holds at least one
// calibration value.
struct NumericBins {
  std::vector<double> edges;  // strictly increasing, below the column max
  std::vector<double> means;  // edges.size() + 1 bin means

  size_t BinOf(double value) const;
};

NumericBins MakeBins(std::span<const double> values, size_t num_bins);

// Factual condition on feature `name` that the instance value satisfies.
// Lower-half bins render as "name <= upper edge", upper-half bins as
// "name > lower edge".
FactualRule NumericRule(const std::string& name, const NumericBins& bins,
                        double value, double column_max);

// Per-instance perturbation explainer. For each feature the model is
// re-run on copies of the instance with that feature changed:
//   categorical  every calibration category, outputs averaged with the
//                calibration frequencies and calibrated once;
//   numeric      the mean of every decile bin except the instance's own,
//                each output calibrated and the estimates averaged.
class BaselineExplainer {
 public:
  static absl::StatusOr<BaselineExplainer> Create(
      std::shared_ptr<const ScoreProvider> model, const Dataset& calibration,
      const BaselineExplainerOptions& options);

  absl::StatusOr<Explanation> Explain(const Dataset& objects,
                                      size_t row) const;
  absl::StatusOr<std::vector<Explanation>> ExplainBatch(
      const Dataset& objects, size_t jobs = 1) const;

  ExplanationKind kind() const { return base_.kind(); }
  const TaskCalibrator& base_calibrator() const { return base_; }
  const NumericBins& bins(size_t f) const { return bins_[f]; }
  double init_seconds() const { return init_seconds_; }

 private:
  BaselineExplainer() = default;

  struct CategoryWeights {
    std::vector<double> codes;
    std::vector<double> frequencies;
  };

  std::shared_ptr<const ScoreProvider> model_;
  BaselineExplainerOptions options_;
  TaskCalibrator base_;
  std::vector<NumericBins> bins_;
  std::vector<double> column_max_;
  std::vector<CategoryWeights> categories_;
  double init_seconds_ = 0;
};

}  // namespace fastcal

#endif  // FASTCAL_EXPLAIN_BASELINE_H_
