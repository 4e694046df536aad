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

#ifndef FASTCAL_EVAL_H_
#define FASTCAL_EVAL_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "fastcal/dataset.h"
#include "fastcal/explain_baseline.h"
#include "fastcal/explain_fast.h"
#include "fastcal/explanation.h"
#include "fastcal/models.h"
#include "json.hpp"

namespace fastcal {

// Population variance (divides by the count); 0 for fewer than two values.
double PopulationVariance(std::span<const double> values);

// runs[r][i] is run r's explanation of test instance i. For every instance
// the top feature is the mode over runs of the feature with the largest
// |weight| (lowest index on ties); the result is the mean over instances of
// that feature's weight variance across runs.
absl::StatusOr<double> TopFeatureVariance(
    const std::vector<std::vector<Explanation>>& runs);

// Explains the fixed test set with the given perturbation seed.
using SeededPipeline =
    std::function<absl::StatusOr<std::vector<Explanation>>(uint64_t seed)>;

// Runs the pipeline with seeds 1..runs and returns TopFeatureVariance.
absl::StatusOr<double> MeasureStability(const SeededPipeline& pipeline,
                                        size_t runs);

struct RefitRun {
  std::vector<Explanation> explanations;
  // Raw model output for the explained class of every test instance.
  std::vector<double> predictions;
};

// Explains the fixed test set after re-splitting and refitting for run
// index `run`.
using RefitPipeline = std::function<absl::StatusOr<RefitRun>(size_t run)>;

struct RobustnessResult {
  double variance = 0;
  // Mean over instances of the model-output variance across runs.
  double prediction_variance = 0;
};

absl::StatusOr<RobustnessResult> MeasureRobustness(
    const RefitPipeline& pipeline, size_t runs);

struct TimingResult {
  double init_seconds = 0;
  double mean_seconds = 0;
  double median_seconds = 0;
  std::vector<double> per_instance;
};

// Times `init` once and `explain(i)` for i in [0, n), after an untimed
// warm-up pass over both.
absl::StatusOr<TimingResult> MeasureTime(
    const std::function<absl::Status()>& init,
    const std::function<absl::Status(size_t)>& explain, size_t n);

struct EvalRecord {
  std::string dataset;
  std::string explainer;
  std::string config;
  double mean_seconds = 0;
  double median_seconds = 0;
  double init_seconds = 0;
  double stability = 0;
  double robustness = 0;
  double prediction_variance = 0;

  bool operator==(const EvalRecord&) const = default;
};

struct EvalReport {
  std::vector<EvalRecord> records;

  bool operator==(const EvalReport&) const = default;
};

nlohmann::ordered_json ReportToJson(const EvalReport& report);
absl::StatusOr<EvalReport> ReportFromJson(const nlohmann::json& json);
std::string ReportToCsv(const EvalReport& report);

enum class ExplainerKind { kFast, kBaseline };

std::string ExplainerName(ExplainerKind kind);
absl::StatusOr<ExplainerKind> ParseExplainer(const std::string& name);

struct ExperimentConfig {
  std::string dataset_name = "data";
  size_t knn_k = 10;
  double train_frac = 0.5;
  double cal_frac = 0.25;
  uint64_t seed = 42;
  // 0 explains every test instance.
  size_t max_test = 100;
  FastExplainerOptions fast;
  BaselineExplainerOptions baseline;
  size_t runs = 5;
  bool stability = true;
  bool robustness = true;
};

// Short "noise=uniform k=5 s=0.5" label of a perturbation configuration.
std::string ConfigLabel(const PerturbConfig& config);

struct ExperimentResult {
  EvalRecord record;
  // Explanations from the timed pass.
  std::vector<Explanation> explanations;
};

// Splits `data` with the configured seed, fits k-NN on the proper training
// set and evaluates one explainer on (at most max_test of) the test set.
// Robustness re-splits the non-test rows with seeds derived from 42 and the
// run index; the explainer seed stays at 42.
absl::StatusOr<ExperimentResult> RunExperiment(const Dataset& data,
                                               ExplainerKind explainer,
                                               const ExperimentConfig& config);

// {uniform, gaussian} x k in {1, 3, 5, 10} x s in {0, 0.25, 0.5, 0.75, 1},
// keeping the mode and seed of `base`.
std::vector<PerturbConfig> AblationGrid(const PerturbConfig& base);

// Fast-explainer experiment for every grid configuration. `visit` (if set)
// sees every result before it is added to the report.
absl::StatusOr<EvalReport> RunAblation(
    const Dataset& data, const ExperimentConfig& config,
    const std::function<absl::Status(const ExperimentResult&)>& visit = {});

}  // namespace fastcal

#endif  // FASTCAL_EVAL_H_
