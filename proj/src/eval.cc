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

#include "fastcal/eval.h"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <optional>
#include <unordered_map>

#include "absl/strings/str_cat.h"
#include "fastcal/csv.h"
#include "fastcal/rng.h"

namespace fastcal {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double Median(std::vector<double> values) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return (values[mid - 1] + values[mid]) / 2;
}

double Mean(std::span<const double> values) {
  if (values.empty()) return 0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

// Either explainer behind one interface.
class AnyExplainer {
 public:
  static absl::StatusOr<AnyExplainer> Create(
      ExplainerKind kind, std::shared_ptr<const ScoreProvider> model,
      const Dataset& calibration, const ExperimentConfig& config,
      uint64_t perturb_seed) {
    AnyExplainer out;
    if (kind == ExplainerKind::kFast) {
      FastExplainerOptions options = config.fast;
      options.perturb.seed = perturb_seed;
      auto fast = FastExplainer::Create(std::move(model), calibration, options);
      if (!fast.ok()) return fast.status();
      out.fast_.emplace(std::move(*fast));
    } else {
      auto baseline =
          BaselineExplainer::Create(std::move(model), calibration,
                                    config.baseline);
      if (!baseline.ok()) return baseline.status();
      out.baseline_.emplace(std::move(*baseline));
    }
    return out;
  }

  absl::StatusOr<Explanation> Explain(const Dataset& objects,
                                      size_t row) const {
    return fast_ ? fast_->Explain(objects, row)
                 : baseline_->Explain(objects, row);
  }

  absl::StatusOr<std::vector<Explanation>> ExplainBatch(
      const Dataset& objects) const {
    return fast_ ? fast_->ExplainBatch(objects)
                 : baseline_->ExplainBatch(objects);
  }

 private:
  std::optional<FastExplainer> fast_;
  std::optional<BaselineExplainer> baseline_;
};

absl::StatusOr<std::shared_ptr<const ScoreProvider>> FitModel(
    const Dataset& train, size_t k) {
  auto task = InferTask(train.schema());
  if (!task.ok()) return task.status();
  auto model = KnnModel::Fit(train, *task, KnnOptions{k});
  if (!model.ok()) return model.status();
  return std::shared_ptr<const ScoreProvider>(std::move(*model));
}

size_t ClassIndex(const Schema& schema, const Explanation& e) {
  if (!e.positive_class) return 0;
  const auto& classes = schema.target.classes;
  return static_cast<size_t>(
      std::find(classes.begin(), classes.end(), *e.positive_class) -
      classes.begin());
}

}  // namespace

double PopulationVariance(std::span<const double> values) {
  if (values.size() < 2) return 0;
  const double mean = Mean(values);
  double sum = 0;
  for (double v : values) sum += (v - mean) * (v - mean);
  return sum / static_cast<double>(values.size());
}

absl::StatusOr<double> TopFeatureVariance(
    const std::vector<std::vector<Explanation>>& runs) {
  if (runs.empty()) return absl::InvalidArgumentError("no runs to compare");
  const size_t instances = runs.front().size();
  for (const auto& run : runs) {
    if (run.size() != instances) {
      return absl::InvalidArgumentError(
          "runs explain different numbers of instances");
    }
  }
  if (instances == 0) return 0.0;
  double total = 0;
  std::vector<double> weights(runs.size());
  for (size_t i = 0; i < instances; ++i) {
    const size_t num_features = runs.front()[i].features.size();
    if (num_features == 0) {
      return absl::InvalidArgumentError("explanation has no features");
    }
    std::vector<size_t> votes(num_features, 0);
    for (const auto& run : runs) {
      if (run[i].features.size() != num_features) {
        return absl::InvalidArgumentError(
            "runs explain different feature sets");
      }
      ++votes[run[i].TopFeature()];
    }
    const size_t top = static_cast<size_t>(
        std::max_element(votes.begin(), votes.end()) - votes.begin());
    for (size_t r = 0; r < runs.size(); ++r) {
      weights[r] = runs[r][i].features[top].weight;
    }
    total += PopulationVariance(weights);
  }
  return total / static_cast<double>(instances);
}

absl::StatusOr<double> MeasureStability(const SeededPipeline& pipeline,
                                        size_t runs) {
  if (runs < 2) return absl::InvalidArgumentError("stability needs R >= 2");
  std::vector<std::vector<Explanation>> results;
  for (size_t r = 1; r <= runs; ++r) {
    auto explanations = pipeline(r);
    if (!explanations.ok()) return explanations.status();
    results.push_back(std::move(*explanations));
  }
  return TopFeatureVariance(results);
}

absl::StatusOr<RobustnessResult> MeasureRobustness(
    const RefitPipeline& pipeline, size_t runs) {
  if (runs < 2) return absl::InvalidArgumentError("robustness needs R >= 2");
  std::vector<std::vector<Explanation>> results;
  std::vector<std::vector<double>> predictions;
  for (size_t r = 0; r < runs; ++r) {
    auto run = pipeline(r);
    if (!run.ok()) return run.status();
    if (run->predictions.size() != run->explanations.size()) {
      return absl::InvalidArgumentError(
          "run has a prediction count different from its explanations");
    }
    results.push_back(std::move(run->explanations));
    predictions.push_back(std::move(run->predictions));
  }
  RobustnessResult out;
  auto variance = TopFeatureVariance(results);
  if (!variance.ok()) return variance.status();
  out.variance = *variance;
  const size_t instances = predictions.front().size();
  if (instances > 0) {
    std::vector<double> column(runs);
    for (size_t i = 0; i < instances; ++i) {
      for (size_t r = 0; r < runs; ++r) column[r] = predictions[r][i];
      out.prediction_variance += PopulationVariance(column);
    }
    out.prediction_variance /= static_cast<double>(instances);
  }
  return out;
}

absl::StatusOr<TimingResult> MeasureTime(
    const std::function<absl::Status()>& init,
    const std::function<absl::Status(size_t)>& explain, size_t n) {
  if (auto status = init(); !status.ok()) return status;
  for (size_t i = 0; i < n; ++i) {
    if (auto status = explain(i); !status.ok()) return status;
  }
  TimingResult out;
  auto start = Clock::now();
  if (auto status = init(); !status.ok()) return status;
  out.init_seconds = Seconds(start);
  out.per_instance.resize(n);
  for (size_t i = 0; i < n; ++i) {
    start = Clock::now();
    if (auto status = explain(i); !status.ok()) return status;
    out.per_instance[i] = Seconds(start);
  }
  out.mean_seconds = Mean(out.per_instance);
  out.median_seconds = Median(out.per_instance);
  return out;
}

ordered_json ReportToJson(const EvalReport& report) {
  ordered_json records = ordered_json::array();
  for (const auto& r : report.records) {
    records.push_back({{"dataset", r.dataset},
                       {"explainer", r.explainer},
                       {"config", r.config},
                       {"mean_seconds", r.mean_seconds},
                       {"median_seconds", r.median_seconds},
                       {"init_seconds", r.init_seconds},
                       {"stability", r.stability},
                       {"robustness", r.robustness},
                       {"prediction_variance", r.prediction_variance}});
  }
  return {{"records", std::move(records)}};
}

absl::StatusOr<EvalReport> ReportFromJson(const json& j) {
  try {
    EvalReport report;
    for (const auto& item : j.at("records")) {
      EvalRecord r;
      r.dataset = item.at("dataset").get<std::string>();
      r.explainer = item.at("explainer").get<std::string>();
      r.config = item.at("config").get<std::string>();
      r.mean_seconds = item.at("mean_seconds").get<double>();
      r.median_seconds = item.at("median_seconds").get<double>();
      r.init_seconds = item.at("init_seconds").get<double>();
      r.stability = item.at("stability").get<double>();
      r.robustness = item.at("robustness").get<double>();
      r.prediction_variance = item.at("prediction_variance").get<double>();
      report.records.push_back(std::move(r));
    }
    return report;
  } catch (const json::exception& ex) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed report JSON: ", ex.what()));
  }
}

std::string ReportToCsv(const EvalReport& report) {
  std::string out =
      "dataset,explainer,config,mean_seconds,median_seconds,init_seconds,"
      "stability,robustness,prediction_variance\n";
  for (const auto& r : report.records) {
    absl::StrAppend(&out, QuoteCsv(r.dataset), ",", QuoteCsv(r.explainer), ",",
                    QuoteCsv(r.config), ",", FormatNumber(r.mean_seconds), ",",
                    FormatNumber(r.median_seconds), ",",
                    FormatNumber(r.init_seconds), ",",
                    FormatNumber(r.stability), ",", FormatNumber(r.robustness),
                    ",", FormatNumber(r.prediction_variance), "\n");
  }
  return out;
}

std::string ExplainerName(ExplainerKind kind) {
  return kind == ExplainerKind::kFast ? "fast" : "baseline";
}

absl::StatusOr<ExplainerKind> ParseExplainer(const std::string& name) {
  if (name == "fast") return ExplainerKind::kFast;
  if (name == "baseline") return ExplainerKind::kBaseline;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown explainer '", name, "' (fast or baseline)"));
}

std::string ConfigLabel(const PerturbConfig& config) {
  return absl::StrCat("noise=", NoiseTypeName(config.noise_type),
                      " k=", config.scale_factor,
                      " s=", FormatNumber(config.severity));
}

absl::StatusOr<ExperimentResult> RunExperiment(const Dataset& data,
                                               ExplainerKind kind,
                                               const ExperimentConfig& config) {
  auto split =
      SplitDataset(data, config.train_frac, config.cal_frac, config.seed);
  if (!split.ok()) return split.status();
  Dataset test = split->test;
  if (config.max_test > 0 && test.num_rows() > config.max_test) {
    std::vector<size_t> rows(config.max_test);
    std::iota(rows.begin(), rows.end(), 0);
    test = test.Subset(rows);
  }
  auto model = FitModel(split->proper_training, config.knn_k);
  if (!model.ok()) return model.status();

  ExperimentResult result;
  EvalRecord& record = result.record;
  record.dataset = config.dataset_name;
  record.explainer = ExplainerName(kind);
  record.config = kind == ExplainerKind::kFast
                      ? ConfigLabel(config.fast.perturb)
                      : absl::StrCat("bins=", config.baseline.num_bins);

  std::optional<AnyExplainer> explainer;
  result.explanations.resize(test.num_rows());
  auto timing = MeasureTime(
      [&]() -> absl::Status {
        auto created = AnyExplainer::Create(kind, *model, split->calibration,
                                            config, config.fast.perturb.seed);
        if (!created.ok()) return created.status();
        explainer.emplace(std::move(*created));
        return absl::OkStatus();
      },
      [&](size_t i) -> absl::Status {
        auto e = explainer->Explain(test, i);
        if (!e.ok()) return e.status();
        result.explanations[i] = std::move(*e);
        return absl::OkStatus();
      },
      test.num_rows());
  if (!timing.ok()) return timing.status();
  record.init_seconds = timing->init_seconds;
  record.mean_seconds = timing->mean_seconds;
  record.median_seconds = timing->median_seconds;

  if (config.stability) {
    auto stability = MeasureStability(
        [&](uint64_t seed) -> absl::StatusOr<std::vector<Explanation>> {
          auto seeded = AnyExplainer::Create(kind, *model, split->calibration,
                                             config, seed);
          if (!seeded.ok()) return seeded.status();
          return seeded->ExplainBatch(test);
        },
        config.runs);
    if (!stability.ok()) return stability.status();
    record.stability = *stability;
  }

  if (config.robustness) {
    std::unordered_map<int64_t, size_t> position;
    for (size_t i = 0; i < data.num_rows(); ++i) {
      position[data.row_ids()[i]] = i;
    }
    std::vector<size_t> pool;
    for (const Dataset* part : {&split->proper_training, &split->calibration}) {
      for (int64_t id : part->row_ids()) pool.push_back(position.at(id));
    }
    const size_t train_size = split->proper_training.num_rows();
    const Schema& schema = data.schema();
    constexpr uint64_t kRobustnessSeed = 42;
    auto robustness = MeasureRobustness(
        [&](size_t run) -> absl::StatusOr<RefitRun> {
          std::vector<size_t> rows = pool;
          Rng rng(DeriveSeed(kRobustnessSeed, run));
          rng.Shuffle(std::span<size_t>(rows));
          const std::span<const size_t> all(rows);
          auto refit = FitModel(data.Subset(all.first(train_size)),
                                config.knn_k);
          if (!refit.ok()) return refit.status();
          const Dataset calibration = data.Subset(all.subspan(train_size));
          auto rerun = AnyExplainer::Create(kind, *refit, calibration, config,
                                            kRobustnessSeed);
          if (!rerun.ok()) return rerun.status();
          RefitRun out;
          auto explanations = rerun->ExplainBatch(test);
          if (!explanations.ok()) return explanations.status();
          out.explanations = std::move(*explanations);
          auto outputs = (*refit)->Predict(test);
          if (!outputs.ok()) return outputs.status();
          for (size_t i = 0; i < test.num_rows(); ++i) {
            out.predictions.push_back(
                outputs->at(i, ClassIndex(schema, out.explanations[i]) %
                                   outputs->cols));
          }
          return out;
        },
        config.runs);
    if (!robustness.ok()) return robustness.status();
    record.robustness = robustness->variance;
    record.prediction_variance = robustness->prediction_variance;
  }
  return result;
}

std::vector<PerturbConfig> AblationGrid(const PerturbConfig& base) {
  std::vector<PerturbConfig> grid;
  for (NoiseType noise : {NoiseType::kUniform, NoiseType::kGaussian}) {
    for (size_t k : {size_t{1}, size_t{3}, size_t{5}, size_t{10}}) {
      for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        PerturbConfig config = base;
        config.noise_type = noise;
        config.scale_factor = k;
        config.severity = s;
        grid.push_back(config);
      }
    }
  }
  return grid;
}

absl::StatusOr<EvalReport> RunAblation(
    const Dataset& data, const ExperimentConfig& config,
    const std::function<absl::Status(const ExperimentResult&)>& visit) {
  EvalReport report;
  for (const PerturbConfig& perturb : AblationGrid(config.fast.perturb)) {
    ExperimentConfig run = config;
    run.fast.perturb = perturb;
    auto result = RunExperiment(data, ExplainerKind::kFast, run);
    if (!result.ok()) return result.status();
    if (visit) {
      if (auto status = visit(*result); !status.ok()) return status;
    }
    report.records.push_back(std::move(result->record));
  }
  return report;
}

}  // namespace fastcal
