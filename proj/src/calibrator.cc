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

#include "fastcal/calibrator.h"

#include <cmath>
#include <mutex>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace fastcal {

std::string DirectionName(ThresholdDirection direction) {
  return direction == ThresholdDirection::kAbove ? "above" : "below";
}

absl::StatusOr<ThresholdDirection> ParseDirection(const std::string& name) {
  if (name == "above") return ThresholdDirection::kAbove;
  if (name == "below") return ThresholdDirection::kBelow;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown threshold direction '", name, "' (above|below)"));
}

std::string ExplanationKindName(ExplanationKind kind) {
  switch (kind) {
    case ExplanationKind::kBinary:
      return "binary";
    case ExplanationKind::kMulticlass:
      return "multiclass";
    case ExplanationKind::kRegression:
      return "regression";
    case ExplanationKind::kThresholded:
      return "thresholded";
  }
  return "unknown";
}

ExplanationKind KindFor(Task task, const CalibrationOptions& options) {
  switch (task) {
    case Task::kBinary:
      return ExplanationKind::kBinary;
    case Task::kMulticlass:
      return ExplanationKind::kMulticlass;
    case Task::kRegression:
      return options.threshold ? ExplanationKind::kThresholded
                               : ExplanationKind::kRegression;
  }
  return ExplanationKind::kBinary;
}

absl::Status ValidateCalibrationOptions(Task task,
                                        const CalibrationOptions& options) {
  if (options.threshold) {
    if (task != Task::kRegression) {
      return absl::InvalidArgumentError(
          "a threshold only applies to regression tasks");
    }
    if (!std::isfinite(options.threshold->t)) {
      return absl::InvalidArgumentError("threshold must be finite");
    }
  }
  if (!(options.low_percentile >= 0 &&
        options.low_percentile < options.high_percentile &&
        options.high_percentile <= 100)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "percentiles must satisfy 0 <= low < high <= 100 (got ",
        options.low_percentile, ", ", options.high_percentile, ")"));
  }
  return absl::OkStatus();
}

struct TaskCalibrator::State {
  ExplanationKind kind;
  CalibrationOptions options;

  // Binary and thresholded.
  std::optional<VennAbersCalibrator> venn_abers;
  // Regression and thresholded.
  std::optional<Cps> cps;

  // Multiclass: raw inputs and per-class calibrators built on demand.
  ScoreMatrix scores;
  std::vector<int> classes;
  mutable std::vector<std::once_flag> built;
  mutable std::vector<std::optional<VennAbersCalibrator>> per_class;

  const VennAbersCalibrator& ForClass(size_t c) const {
    std::call_once(built[c], [&] {
      const std::vector<double> column = scores.Column(c);
      std::vector<int> labels(classes.size());
      for (size_t i = 0; i < classes.size(); ++i) {
        labels[i] = classes[i] == static_cast<int>(c) ? 1 : 0;
      }
      // Scores were range-checked in Create, so this cannot fail.
      per_class[c] = *VennAbersCalibrator::Create(column, labels);
    });
    return *per_class[c];
  }
};

absl::StatusOr<TaskCalibrator> TaskCalibrator::Create(
    Task task, const CalibrationOptions& options, const ScoreMatrix& outputs,
    std::span<const double> targets) {
  if (auto status = ValidateCalibrationOptions(task, options); !status.ok()) {
    return status;
  }
  if (outputs.rows != targets.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "calibration has ", outputs.rows, " model outputs for ",
        targets.size(), " targets"));
  }
  if (targets.empty()) {
    return absl::InvalidArgumentError("calibration set is empty");
  }
  auto state = std::make_shared<State>();
  state->kind = KindFor(task, options);
  state->options = options;

  switch (state->kind) {
    case ExplanationKind::kBinary: {
      if (outputs.cols != 2) {
        return absl::InvalidArgumentError("binary outputs need two columns");
      }
      std::vector<int> labels(targets.size());
      for (size_t i = 0; i < targets.size(); ++i) {
        labels[i] = static_cast<int>(targets[i]);
      }
      auto va = VennAbersCalibrator::Create(outputs.Column(1), labels);
      if (!va.ok()) return va.status();
      state->venn_abers = std::move(*va);
      break;
    }
    case ExplanationKind::kMulticlass: {
      for (double s : outputs.values) {
        if (!(s >= 0 && s <= 1)) {
          return absl::InvalidArgumentError(
              absl::StrCat("class score ", s, " is outside [0, 1]"));
        }
      }
      state->scores = outputs;
      state->classes.resize(targets.size());
      for (size_t i = 0; i < targets.size(); ++i) {
        state->classes[i] = static_cast<int>(targets[i]);
      }
      state->built = std::vector<std::once_flag>(outputs.cols);
      state->per_class.resize(outputs.cols);
      break;
    }
    case ExplanationKind::kRegression: {
      auto cps = Cps::Create(outputs.Column(0), targets, options.tau_mode,
                             options.tau_seed);
      if (!cps.ok()) return cps.status();
      state->cps = std::move(*cps);
      break;
    }
    case ExplanationKind::kThresholded: {
      const std::vector<double> predictions = outputs.Column(0);
      auto cps = Cps::Create(predictions, targets, options.tau_mode,
                             options.tau_seed);
      if (!cps.ok()) return cps.status();
      const double t = options.threshold->t;
      std::vector<double> scores(targets.size());
      std::vector<int> labels(targets.size());
      for (size_t i = 0; i < targets.size(); ++i) {
        const double residual = targets[i] - predictions[i];
        scores[i] =
            options.threshold_scoring == ThresholdScoring::kLeaveOneOut
                ? cps->CpdValueExcluding(predictions[i], t, residual, i)
                : cps->CpdValue(predictions[i], t, i);
        labels[i] = targets[i] <= t ? 1 : 0;
      }
      auto va = VennAbersCalibrator::Create(scores, labels);
      if (!va.ok()) return va.status();
      state->cps = std::move(*cps);
      state->venn_abers = std::move(*va);
      break;
    }
  }
  return TaskCalibrator(std::move(state));
}

ExplanationKind TaskCalibrator::kind() const { return state_->kind; }

Estimate TaskCalibrator::Calibrate(std::span<const double> output,
                                   size_t class_index, uint64_t key) const {
  const State& s = *state_;
  switch (s.kind) {
    case ExplanationKind::kBinary: {
      const auto va = s.venn_abers->Calibrate(output[1]);
      return {va.p, va.low, va.high};
    }
    case ExplanationKind::kMulticlass: {
      const auto va = s.ForClass(class_index).Calibrate(output[class_index]);
      return {va.p, va.low, va.high};
    }
    case ExplanationKind::kRegression: {
      const double prediction = output[0];
      // Percentiles were validated in Create.
      const Interval interval =
          *s.cps->QueryInterval(prediction, s.options.low_percentile,
                                s.options.high_percentile);
      return {s.cps->QueryMedian(prediction), interval.lower, interval.upper};
    }
    case ExplanationKind::kThresholded: {
      const double score =
          s.cps->CpdValue(output[0], s.options.threshold->t, key);
      const auto va = s.venn_abers->Calibrate(score);
      if (s.options.threshold->direction == ThresholdDirection::kBelow) {
        return {va.p, va.low, va.high};
      }
      return {1.0 - va.p, 1.0 - va.high, 1.0 - va.low};
    }
  }
  return {};
}

Estimate TaskCalibrator::Offsets() const {
  const State& s = *state_;
  if (s.kind != ExplanationKind::kRegression) return {};
  const Interval interval = *s.cps->IntervalOffsets(
      s.options.low_percentile, s.options.high_percentile);
  return {s.cps->MedianOffset(), interval.lower, interval.upper};
}

}  // namespace fastcal
