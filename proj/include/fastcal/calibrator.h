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

#ifndef FASTCAL_CALIBRATOR_H_
#define FASTCAL_CALIBRATOR_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "absl/status/statusor.h"
#include "fastcal/cps.h"
#include "fastcal/models.h"
#include "fastcal/venn_abers.h"

namespace fastcal {

enum class ThresholdDirection {
  kBelow,  // report p(y <= t)
  kAbove,  // report p(y > t)
};

std::string DirectionName(ThresholdDirection direction);
absl::StatusOr<ThresholdDirection> ParseDirection(const std::string& name);

struct ThresholdSpec {
  double t = 0;
  ThresholdDirection direction = ThresholdDirection::kAbove;
};

// How calibration rows are scored for the thresholded composite.
enum class ThresholdScoring {
  // CPD(t) from the residuals of all other calibration rows.
  kLeaveOneOut,
  // CPD(t) from all residuals, the row's own included.
  kInSample,
};

struct CalibrationOptions {
  // Present iff regression should be explained as a threshold probability.
  std::optional<ThresholdSpec> threshold;
  // Interval percentiles for standard regression.
  double low_percentile = 5;
  double high_percentile = 95;
  TauMode tau_mode = TauMode::kFixedHalf;
  uint64_t tau_seed = 0;
  ThresholdScoring threshold_scoring = ThresholdScoring::kLeaveOneOut;
};

absl::Status ValidateCalibrationOptions(Task task,
                                        const CalibrationOptions& options);

enum class ExplanationKind { kBinary, kMulticlass, kRegression, kThresholded };

std::string ExplanationKindName(ExplanationKind kind);
ExplanationKind KindFor(Task task, const CalibrationOptions& options);

// A calibrated value with its uncertainty interval.
struct Estimate {
  double value = 0;
  double low = 0;
  double high = 0;
};

// Calibrates raw model outputs for one explanation kind:
//   binary       Venn-Abers on the positive-class score (p, [low, high]);
//   multiclass   one-vs-rest Venn-Abers on the requested class, built on
//                first use and cached per class;
//   regression   CPS median and percentile interval;
//   thresholded  CPD(t) as a score, Venn-Abers calibrated against
//                1{y <= t}, reported in the requested direction.
//
// Copies share the underlying calibrators. All methods are thread-safe.
class TaskCalibrator {
 public:
  TaskCalibrator() = default;

  static absl::StatusOr<TaskCalibrator> Create(
      Task task, const CalibrationOptions& options, const ScoreMatrix& outputs,
      std::span<const double> targets);

  ExplanationKind kind() const;

  // `class_index` selects the positive class for multiclass; binary always
  // uses class 1 and regression ignores it. `key` feeds the seeded tau.
  Estimate Calibrate(std::span<const double> output, size_t class_index,
                     uint64_t key) const;

  // Standard regression only: the instance-independent median and interval
  // offsets added to the model prediction.
  Estimate Offsets() const;

 private:
  struct State;
  explicit TaskCalibrator(std::shared_ptr<const State> state)
      : state_(std::move(state)) {}

  std::shared_ptr<const State> state_;
};

}  // namespace fastcal

#endif  // FASTCAL_CALIBRATOR_H_
