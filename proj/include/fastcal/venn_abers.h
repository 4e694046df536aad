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

#ifndef FASTCAL_VENN_ABERS_H_
#define FASTCAL_VENN_ABERS_H_

#include <span>
#include <vector>

#include "absl/status/statusor.h"

namespace fastcal {

// Probability interval for the positive label plus the regularized point
// estimate p = high / (1 - low + high), which minimizes log loss over the
// interval.
struct VennAbersPrediction {
  double low = 0;
  double high = 0;
  double p = 0;
};

// Inductive Venn-Abers calibrator over (score, label) calibration pairs.
//
// Each query runs two isotonic fits over the calibration pairs augmented with
// the test score, once labelled 0 (giving `low`) and once labelled 1 (giving
// `high`). Pairs are kept grouped by distinct score so each fit is linear in
// the number of distinct calibration scores.
class VennAbersCalibrator {
 public:
  // Scores must lie in [0, 1] and labels in {0, 1}; at least one pair.
  static absl::StatusOr<VennAbersCalibrator> Create(
      std::span<const double> scores, std::span<const int> labels);

  VennAbersPrediction Calibrate(double test_score) const;
  std::vector<VennAbersPrediction> CalibrateBatch(
      std::span<const double> test_scores) const;

  size_t size() const { return size_; }

 private:
  VennAbersCalibrator() = default;

  // Distinct calibration scores, ascending, with per-score label sums and
  // counts.
  std::vector<double> scores_;
  std::vector<double> positives_;
  std::vector<double> counts_;
  size_t size_ = 0;
};

}  // namespace fastcal

#endif  // FASTCAL_VENN_ABERS_H_
