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

#include "fastcal/explain_fast.h"

#include <algorithm>
#include <chrono>
#include <thread>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace fastcal {
namespace {

std::vector<double> Repeat(std::span<const double> values, size_t k) {
  std::vector<double> out;
  out.reserve(values.size() * k);
  for (size_t copy = 0; copy < k; ++copy) {
    out.insert(out.end(), values.begin(), values.end());
  }
  return out;
}

}  // namespace

void ParallelFor(size_t n, size_t jobs, const std::function<void(size_t)>& fn) {
  jobs = std::max<size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      for (size_t i = w; i < n; i += jobs) fn(i);
    });
  }
  for (auto& worker : workers) worker.join();
}

size_t ChoosePositiveClass(const TaskCalibrator& base,
                           std::span<const double> output, uint64_t key) {
  if (base.kind() != ExplanationKind::kMulticlass) return 1;
  size_t best = 0;
  double best_value = -1;
  for (size_t c = 0; c < output.size(); ++c) {
    const double value = base.Calibrate(output, c, key).value;
    if (value > best_value) {
      best = c;
      best_value = value;
    }
  }
  return best;
}

absl::StatusOr<FastExplainer> FastExplainer::Create(
    std::shared_ptr<const ScoreProvider> model, const Dataset& calibration,
    const FastExplainerOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (model == nullptr) {
    return absl::InvalidArgumentError("fast explainer needs a model");
  }
  if (calibration.empty()) {
    return absl::InvalidArgumentError("calibration set is empty");
  }
  if (auto status =
          ValidateCalibrationOptions(model->task(), options.calibration);
      !status.ok()) {
    return status;
  }
  if (auto status = ValidatePerturbConfig(options.perturb); !status.ok()) {
    return status;
  }

  FastExplainer explainer;
  explainer.model_ = model;
  explainer.schema_ = calibration.schema_ptr();
  explainer.options_ = options;

  auto base_outputs = model->Predict(calibration);
  if (!base_outputs.ok()) return base_outputs.status();
  auto base = TaskCalibrator::Create(model->task(), options.calibration,
                                     *base_outputs, calibration.targets());
  if (!base.ok()) return base.status();
  explainer.base_ = std::move(*base);

  auto perturbed = PerturbCalibration(calibration, options.perturb);
  if (!perturbed.ok()) return perturbed.status();
  const std::vector<size_t> base_rows = perturbed->BaseRows();
  const std::vector<double> targets =
      Repeat(calibration.targets(), options.perturb.scale_factor);
  explainer.perturbed_rows_ = base_rows.size();

  const size_t num_features = calibration.num_features();
  std::vector<ScoreMatrix> outputs;
  if (model->EvaluatesArbitraryObjects()) {
    std::vector<FeatureReplacement> requests;
    for (size_t f = 0; f < num_features; ++f) {
      requests.push_back({f, base_rows, perturbed->columns[f]});
    }
    auto scores = model->PredictWithReplacements(calibration, requests);
    if (!scores.ok()) return scores.status();
    outputs = std::move(*scores);
  } else {
    for (size_t f = 0; f < num_features; ++f) {
      auto scores = model->StoredPerturbedOutputs(f, base_rows.size());
      if (!scores.ok()) return scores.status();
      outputs.push_back(std::move(*scores));
    }
  }
  for (size_t f = 0; f < num_features; ++f) {
    auto calibrator = TaskCalibrator::Create(
        model->task(), options.calibration, outputs[f], targets);
    if (!calibrator.ok()) return calibrator.status();
    explainer.feature_calibrators_.push_back(std::move(*calibrator));
  }
  explainer.init_seconds_ =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return explainer;
}

Explanation FastExplainer::ExplainOutput(const Dataset& objects, size_t row,
                                         std::span<const double> output) const {
  Explanation e;
  e.instance_id = objects.row_ids()[row];
  e.kind = base_.kind();
  e.threshold = options_.calibration.threshold;
  const auto key = static_cast<uint64_t>(e.instance_id);
  const size_t positive = ChoosePositiveClass(base_, output, key);
  if (objects.schema().target.categorical) {
    e.positive_class = objects.schema().target.classes[positive];
  }
  e.prediction = base_.Calibrate(output, positive, key);

  // Standard regression weights are taken in residual space, where they do
  // not depend on the instance's prediction.
  const bool regression = e.kind == ExplanationKind::kRegression;
  const Estimate base_offsets = regression ? base_.Offsets() : Estimate{};

  const Schema& schema = objects.schema();
  e.features.reserve(feature_calibrators_.size());
  for (size_t f = 0; f < feature_calibrators_.size(); ++f) {
    FeatureWeight w;
    w.name = schema.features[f].name;
    w.value = objects.value(row, f);
    w.value_text = schema.FormatValue(f, w.value);
    w.categorical = schema.features[f].is_categorical();
    const Estimate reference = regression ? base_offsets : e.prediction;
    const Estimate perturbed =
        regression ? feature_calibrators_[f].Offsets()
                   : feature_calibrators_[f].Calibrate(output, positive, key);
    w.weight = reference.value - perturbed.value;
    w.low = reference.value - perturbed.high;
    w.high = reference.value - perturbed.low;
    e.features.push_back(std::move(w));
  }
  return e;
}

absl::StatusOr<Explanation> FastExplainer::Explain(const Dataset& objects,
                                                   size_t row) const {
  if (row >= objects.num_rows()) {
    return absl::OutOfRangeError(absl::StrCat("row ", row, " out of range"));
  }
  const size_t index[] = {row};
  const Dataset single = objects.Subset(index);
  auto output = model_->Predict(single);
  if (!output.ok()) return output.status();
  return ExplainOutput(single, 0, output->row(0));
}

absl::StatusOr<std::vector<Explanation>> FastExplainer::ExplainBatch(
    const Dataset& objects, size_t jobs) const {
  std::vector<Explanation> out(objects.num_rows());
  if (objects.empty()) return out;
  auto outputs = model_->Predict(objects);
  if (!outputs.ok()) return outputs.status();
  ParallelFor(objects.num_rows(), jobs, [&](size_t i) {
    out[i] = ExplainOutput(objects, i, outputs->row(i));
  });
  return out;
}

}  // namespace fastcal
