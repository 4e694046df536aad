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

#include "fastcal/venn_abers.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fastcal/isotonic.h"

namespace fastcal {

absl::StatusOr<VennAbersCalibrator> VennAbersCalibrator::Create(
    std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Venn-Abers calibration has ", scores.size(), " scores but ",
        labels.size(), " labels"));
  }
  if (scores.empty()) {
    return absl::InvalidArgumentError(
        "Venn-Abers calibration needs at least one pair");
  }
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0 && scores[i] <= 1)) {
      return absl::InvalidArgumentError(
          absl::StrCat("calibration score ", i, " = ", scores[i],
                       " is outside [0, 1]"));
    }
    if (labels[i] != 0 && labels[i] != 1) {
      return absl::InvalidArgumentError(
          absl::StrCat("calibration label ", i, " = ", labels[i],
                       " is not 0 or 1"));
    }
  }
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  VennAbersCalibrator calibrator;
  calibrator.size_ = scores.size();
  for (size_t i : order) {
    if (!calibrator.scores_.empty() && calibrator.scores_.back() == scores[i]) {
      calibrator.positives_.back() += labels[i];
      calibrator.counts_.back() += 1;
    } else {
      calibrator.scores_.push_back(scores[i]);
      calibrator.positives_.push_back(labels[i]);
      calibrator.counts_.push_back(1);
    }
  }
  return calibrator;
}

VennAbersPrediction VennAbersCalibrator::Calibrate(double test_score) const {
  thread_local std::vector<double> sums, weights, fitted;
  const size_t n = scores_.size();
  const size_t at = static_cast<size_t>(
      std::lower_bound(scores_.begin(), scores_.end(), test_score) -
      scores_.begin());
  const bool shared = at < n && scores_[at] == test_score;
  const size_t m = shared ? n : n + 1;
  sums.resize(m);
  weights.resize(m);
  fitted.resize(m);

  // Per-group label counts; the test point either joins the group with an
  // equal score or is inserted as its own group at `at`.
  double fit_at[2];
  for (int label = 0; label <= 1; ++label) {
    for (size_t i = 0, j = 0; j < m; ++j) {
      if (j == at) {
        const double positives = (shared ? positives_[i] : 0.0) + label;
        const double count = (shared ? counts_[i] : 0.0) + 1.0;
        sums[j] = positives;
        weights[j] = count;
        if (shared) ++i;
      } else {
        sums[j] = positives_[i];
        weights[j] = counts_[i];
        ++i;
      }
    }
    PoolAdjacentViolatorsFromSums(sums, weights, fitted);
    fit_at[label] = fitted[at];
  }
  VennAbersPrediction prediction;
  prediction.low = fit_at[0];
  prediction.high = fit_at[1];
  prediction.p = std::clamp(
      prediction.high / (1.0 - prediction.low + prediction.high),
      prediction.low, prediction.high);
  return prediction;
}

std::vector<VennAbersPrediction> VennAbersCalibrator::CalibrateBatch(
    std::span<const double> test_scores) const {
  std::vector<VennAbersPrediction> out;
  out.reserve(test_scores.size());
  for (double s : test_scores) out.push_back(Calibrate(s));
  return out;
}

}  // namespace fastcal
