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

#include "fastcal/explain_baseline.h"

#include <algorithm>
#include <chrono>
#include <map>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fastcal/csv.h"
#include "fastcal/explain_fast.h"

namespace fastcal {

size_t NumericBins::BinOf(double value) const {
  return static_cast<size_t>(
      std::lower_bound(edges.begin(), edges.end(), value) - edges.begin());
}

NumericBins MakeBins(std::span<const double> values, size_t num_bins) {
  NumericBins bins;
  if (values.empty()) return bins;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const size_t q = sorted.size();
  for (size_t j = 1; j < num_bins; ++j) {
    const size_t rank = (j * q + num_bins - 1) / num_bins;
    if (rank == 0) continue;
    const double edge = sorted[rank - 1];
    if (edge >= sorted.back()) break;
    if (bins.edges.empty() || edge > bins.edges.back()) {
      bins.edges.push_back(edge);
    }
  }
  std::vector<double> sums(bins.edges.size() + 1, 0.0);
  std::vector<size_t> counts(bins.edges.size() + 1, 0);
  for (double v : sorted) {
    const size_t b = bins.BinOf(v);
    sums[b] += v;
    ++counts[b];
  }
  for (size_t b = 0; b < sums.size(); ++b) {
    bins.means.push_back(sums[b] / static_cast<double>(counts[b]));
  }
  return bins;
}

FactualRule NumericRule(const std::string& name, const NumericBins& bins,
                        double value, double column_max) {
  FactualRule rule;
  const size_t num_bins = bins.edges.size() + 1;
  const size_t b = bins.BinOf(value);
  if (num_bins == 1) {
    rule.kind = ConditionKind::kAtMost;
    rule.threshold = std::max(column_max, value);
  } else if (b < num_bins / 2) {
    rule.kind = ConditionKind::kAtMost;
    rule.threshold = bins.edges[b];
  } else {
    rule.kind = ConditionKind::kAbove;
    rule.threshold = bins.edges[b - 1];
  }
  rule.text = absl::StrCat(
      name, rule.kind == ConditionKind::kAtMost ? " <= " : " > ",
      FormatNumber(rule.threshold));
  return rule;
}

absl::StatusOr<BaselineExplainer> BaselineExplainer::Create(
    std::shared_ptr<const ScoreProvider> model, const Dataset& calibration,
    const BaselineExplainerOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (model == nullptr) {
    return absl::InvalidArgumentError("baseline explainer needs a model");
  }
  if (!model->EvaluatesArbitraryObjects()) {
    return absl::FailedPreconditionError(
        "the baseline explainer re-runs the model on perturbed instances; "
        "use a built-in model");
  }
  if (calibration.empty()) {
    return absl::InvalidArgumentError("calibration set is empty");
  }
  if (options.num_bins < 2) {
    return absl::InvalidArgumentError("baseline needs at least 2 bins");
  }
  if (auto status =
          ValidateCalibrationOptions(model->task(), options.calibration);
      !status.ok()) {
    return status;
  }
  BaselineExplainer explainer;
  explainer.model_ = model;
  explainer.options_ = options;
  auto outputs = model->Predict(calibration);
  if (!outputs.ok()) return outputs.status();
  auto base = TaskCalibrator::Create(model->task(), options.calibration,
                                     *outputs, calibration.targets());
  if (!base.ok()) return base.status();
  explainer.base_ = std::move(*base);

  const Schema& schema = calibration.schema();
  const auto q = static_cast<double>(calibration.num_rows());
  for (size_t f = 0; f < schema.num_features(); ++f) {
    const std::vector<double> column = calibration.Column(f);
    CategoryWeights weights;
    NumericBins bins;
    if (schema.features[f].is_categorical()) {
      std::map<double, size_t> counts;
      for (double v : column) ++counts[v];
      for (const auto& [code, count] : counts) {
        weights.codes.push_back(code);
        weights.frequencies.push_back(static_cast<double>(count) / q);
      }
    } else {
      bins = MakeBins(column, options.num_bins);
    }
    explainer.bins_.push_back(std::move(bins));
    explainer.categories_.push_back(std::move(weights));
    explainer.column_max_.push_back(
        *std::max_element(column.begin(), column.end()));
  }
  explainer.init_seconds_ =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return explainer;
}

absl::StatusOr<Explanation> BaselineExplainer::Explain(const Dataset& objects,
                                                       size_t row) const {
  if (row >= objects.num_rows()) {
    return absl::OutOfRangeError(absl::StrCat("row ", row, " out of range"));
  }
  const size_t index[] = {row};
  const Dataset single = objects.Subset(index);
  auto output = model_->Predict(single);
  if (!output.ok()) return output.status();

  Explanation e;
  e.instance_id = single.row_ids()[0];
  e.kind = base_.kind();
  e.threshold = options_.calibration.threshold;
  const auto key = static_cast<uint64_t>(e.instance_id);
  const size_t positive = ChoosePositiveClass(base_, output->row(0), key);
  const Schema& schema = single.schema();
  if (schema.target.categorical) {
    e.positive_class = schema.target.classes[positive];
  }
  e.prediction = base_.Calibrate(output->row(0), positive, key);

  const size_t num_features = schema.num_features();
  std::vector<std::vector<double>> values(num_features);
  std::vector<std::vector<size_t>> rows(num_features);
  std::vector<FeatureReplacement> requests;
  for (size_t f = 0; f < num_features; ++f) {
    if (schema.features[f].is_categorical()) {
      values[f] = categories_[f].codes;
    } else {
      const size_t own = bins_[f].BinOf(single.value(0, f));
      for (size_t b = 0; b < bins_[f].means.size(); ++b) {
        if (b != own) values[f].push_back(bins_[f].means[b]);
      }
    }
    rows[f].assign(values[f].size(), 0);
    e.perturbed_calls += values[f].size();
    requests.push_back({f, rows[f], values[f]});
  }
  auto outputs = model_->PredictWithReplacements(single, requests);
  if (!outputs.ok()) return outputs.status();

  for (size_t f = 0; f < num_features; ++f) {
    FeatureWeight w;
    w.name = schema.features[f].name;
    w.value = single.value(0, f);
    w.value_text = schema.FormatValue(f, w.value);
    w.categorical = schema.features[f].is_categorical();

    const ScoreMatrix& scores = (*outputs)[f];
    const size_t n = values[f].size();
    Estimate perturbed = e.prediction;
    if (n > 0 && w.categorical) {
      std::vector<double> mean(scores.cols, 0.0);
      for (size_t j = 0; j < n; ++j) {
        for (size_t c = 0; c < scores.cols; ++c) {
          mean[c] += categories_[f].frequencies[j] * scores.at(j, c);
        }
      }
      perturbed = base_.Calibrate(mean, positive, key);
    } else if (n > 0) {
      perturbed = {0, 0, 0};
      for (size_t j = 0; j < n; ++j) {
        const Estimate est = base_.Calibrate(scores.row(j), positive, key);
        perturbed.value += est.value;
        perturbed.low += est.low;
        perturbed.high += est.high;
      }
      perturbed.value /= static_cast<double>(n);
      perturbed.low /= static_cast<double>(n);
      perturbed.high /= static_cast<double>(n);
    }
    w.weight = e.prediction.value - perturbed.value;
    w.low = e.prediction.value - perturbed.high;
    w.high = e.prediction.value - perturbed.low;

    if (w.categorical) {
      w.rule = FactualRule{ConditionKind::kEquals, w.value,
                           absl::StrCat(w.name, " = ", w.value_text)};
    } else {
      w.rule = NumericRule(w.name, bins_[f], w.value, column_max_[f]);
    }
    e.features.push_back(std::move(w));
  }
  return e;
}

absl::StatusOr<std::vector<Explanation>> BaselineExplainer::ExplainBatch(
    const Dataset& objects, size_t jobs) const {
  std::vector<absl::StatusOr<Explanation>> results(objects.num_rows());
  ParallelFor(objects.num_rows(), jobs,
              [&](size_t i) { results[i] = Explain(objects, i); });
  std::vector<Explanation> out;
  out.reserve(results.size());
  for (auto& result : results) {
    if (!result.ok()) return result.status();
    out.push_back(std::move(*result));
  }
  return out;
}

}  // namespace fastcal
