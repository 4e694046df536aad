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

#include "fastcal/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <numeric>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "fastcal/csv.h"
#include "fastcal/dataset.h"
#include "fastcal/eval.h"
#include "fastcal/explain_baseline.h"
#include "fastcal/explain_fast.h"
#include "fastcal/explanation.h"
#include "fastcal/models.h"
#include "fastcal/perturb.h"
#include "fastcal/synthetic.h"

namespace fastcal {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// A failed step together with the exit code it maps to.
struct Failure {
  int code;
  std::string message;
};

template <typename T>
using Result = std::variant<T, Failure>;

Failure ConfigError(const absl::Status& status) {
  return {kExitConfig, std::string(status.message())};
}
Failure DataError(const absl::Status& status) {
  return {kExitData, std::string(status.message())};
}
// Configuration problems detected late (k larger than the training set,
// missing perturbed scores) still count as configuration errors.
Failure RuntimeError(const absl::Status& status) {
  const bool config = absl::IsInvalidArgument(status) ||
                      absl::IsFailedPrecondition(status);
  return {config ? kExitConfig : kExitRuntime, std::string(status.message())};
}

struct Options {
  std::optional<Task> task;
  FastExplainerOptions fast;
  BaselineExplainerOptions baseline;
  ExplainerKind explainer = ExplainerKind::kFast;
  std::string model_kind;
  size_t knn_k = 0;
  std::string model_path;
};

Result<Options> Resolve(const RunConfig& config) {
  Options o;
  const auto fail = [](const std::string& message) {
    return Failure{kExitConfig, message};
  };
  if (config.task == "binary") {
    o.task = Task::kBinary;
  } else if (config.task == "multiclass") {
    o.task = Task::kMulticlass;
  } else if (config.task == "regression" || config.task == "thresholded") {
    o.task = Task::kRegression;
  } else if (config.task != "auto") {
    return fail(absl::StrCat("--task: unknown task '", config.task,
                             "' (auto|binary|multiclass|regression|"
                             "thresholded)"));
  }
  if (config.task == "thresholded" && !config.threshold) {
    return fail("--task thresholded requires --threshold");
  }
  if (config.threshold && o.task && *o.task != Task::kRegression) {
    return fail("--threshold applies to regression tasks only");
  }

  auto noise = ParseNoiseType(config.noise_type);
  if (!noise.ok()) return fail(absl::StrCat("--noise-type: ", noise.status().message()));
  auto mode = ParsePerturbMode(config.mode);
  if (!mode.ok()) return fail(absl::StrCat("--mode: ", mode.status().message()));
  auto direction = ParseDirection(config.direction);
  if (!direction.ok()) {
    return fail(absl::StrCat("--direction: ", direction.status().message()));
  }
  auto explainer = ParseExplainer(config.explainer);
  if (!explainer.ok()) {
    return fail(absl::StrCat("--explainer: ", explainer.status().message()));
  }
  o.explainer = *explainer;

  PerturbConfig& perturb = o.fast.perturb;
  perturb.noise_type = *noise;
  perturb.mode = *mode;
  perturb.scale_factor = config.scale_factor;
  perturb.severity = config.severity;
  perturb.seed = config.seed;
  if (auto status = ValidatePerturbConfig(perturb); !status.ok()) {
    return fail(std::string(status.message()));
  }

  CalibrationOptions& cal = o.fast.calibration;
  if (config.threshold) cal.threshold = ThresholdSpec{*config.threshold, *direction};
  cal.low_percentile = config.low_percentile;
  cal.high_percentile = config.high_percentile;
  if (config.tau == "fixed") {
    cal.tau_mode = TauMode::kFixedHalf;
  } else if (config.tau == "random") {
    cal.tau_mode = TauMode::kSeededUniform;
  } else {
    return fail(absl::StrCat("--tau: unknown mode '", config.tau,
                             "' (fixed|random)"));
  }
  cal.tau_seed = config.seed;
  if (config.threshold_scoring == "leave-one-out") {
    cal.threshold_scoring = ThresholdScoring::kLeaveOneOut;
  } else if (config.threshold_scoring == "in-sample") {
    cal.threshold_scoring = ThresholdScoring::kInSample;
  } else {
    return fail(absl::StrCat("--threshold-scoring: unknown mode '",
                             config.threshold_scoring,
                             "' (leave-one-out|in-sample)"));
  }
  if (!(config.low_percentile >= 0 && config.low_percentile <
                                          config.high_percentile &&
        config.high_percentile <= 100)) {
    return fail("--percentiles: need 0 <= low < high <= 100");
  }
  o.baseline.calibration = cal;

  const std::vector<std::string> model =
      absl::StrSplit(config.model, absl::MaxSplits(':', 1));
  if (model.size() == 2 && model[0] == "knn") {
    o.model_kind = "knn";
    if (!absl::SimpleAtoi(model[1], &o.knn_k) || o.knn_k == 0) {
      return fail(absl::StrCat("--model: bad k in '", config.model, "'"));
    }
  } else if (model.size() == 2 && model[0] == "external" &&
             !model[1].empty()) {
    o.model_kind = "external";
    o.model_path = model[1];
  } else {
    return fail(absl::StrCat("--model: expected knn:K or external:PATH, got '",
                             config.model, "'"));
  }
  if (!config.perturbed_scores.empty() && o.model_kind != "external") {
    return fail("--perturbed-scores needs --model external:PATH");
  }
  if (!(config.train_frac > 0 && config.cal_frac > 0 &&
        config.train_frac + config.cal_frac < 1)) {
    return fail("--train-frac/--cal-frac: need positive fractions summing "
                "below 1");
  }
  if (config.jobs == 0) return fail("--jobs: must be at least 1");
  return o;
}

Result<Dataset> LoadData(const RunConfig& config, const Options& o) {
  if (config.data.empty()) {
    if (config.synthetic.empty()) {
      return Failure{kExitConfig, "--data (or --synthetic) is required"};
    }
    auto data = MakeNamed(config.synthetic, config.n, config.seed);
    if (!data.ok()) return ConfigError(data.status());
    return std::move(*data);
  }
  CsvOptions csv;
  if (o.task) {
    csv.target_kind = *o.task == Task::kRegression ? TargetKind::kNumeric
                                                   : TargetKind::kCategorical;
  }
  if (!config.target.empty()) {
    auto table = ReadCsvTable(config.data);
    if (!table.ok()) return DataError(table.status());
    const auto& header = table->header;
    const auto it = std::find(header.begin(), header.end(), config.target);
    if (it == header.end()) {
      return Failure{kExitConfig,
                     absl::StrCat("--target: no column '", config.target,
                                  "' in ", config.data)};
    }
    csv.target_column = static_cast<size_t>(it - header.begin());
  }
  auto data = LoadCsv(config.data, csv);
  if (!data.ok()) return DataError(data.status());
  return std::move(*data);
}

Result<Task> CheckTask(const Dataset& data, const Options& o) {
  auto inferred = InferTask(data.schema());
  if (!inferred.ok()) return DataError(inferred.status());
  if (o.task && *o.task != *inferred) {
    return Failure{kExitConfig,
                   absl::StrCat("--task ", TaskName(*o.task),
                                " does not fit target '",
                                data.schema().target.name, "' (",
                                TaskName(*inferred), ")")};
  }
  if (*inferred != Task::kRegression &&
      o.fast.calibration.threshold.has_value()) {
    return Failure{kExitConfig,
                   "--threshold applies to regression tasks only"};
  }
  return *inferred;
}

Result<std::shared_ptr<const ScoreProvider>> MakeModel(
    const RunConfig& config, const Options& o, const Split& split,
    Task task) {
  if (o.model_kind == "knn") {
    auto model = KnnModel::Fit(split.proper_training, task, KnnOptions{o.knn_k});
    if (!model.ok()) return ConfigError(model.status());
    return std::shared_ptr<const ScoreProvider>(std::move(*model));
  }
  auto model =
      ExternalScores::Load(o.model_path, split.calibration.schema_ptr(), task);
  if (!model.ok()) return DataError(model.status());
  if (!config.perturbed_scores.empty()) {
    if (auto status = (*model)->LoadPerturbed(config.perturbed_scores);
        !status.ok()) {
      return DataError(status);
    }
  }
  return std::shared_ptr<const ScoreProvider>(std::move(*model));
}

Dataset Limit(const Dataset& test, size_t limit) {
  if (limit == 0 || limit >= test.num_rows()) return test;
  std::vector<size_t> rows(limit);
  std::iota(rows.begin(), rows.end(), 0);
  return test.Subset(rows);
}

// Output stream: the --out file if given, else `fallback`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      stream_ = &file_;
    }
  }
  bool ok() const { return stream_ != &file_ || file_.good(); }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

int Report(const Failure& failure, std::ostream& err) {
  err << "error: " << failure.message << "\n";
  return failure.code;
}

int CmdExplain(const RunConfig& config, std::ostream& out, std::ostream& err) {
  auto options = Resolve(config);
  if (auto* f = std::get_if<Failure>(&options)) return Report(*f, err);
  const Options& o = std::get<Options>(options);
  auto data = LoadData(config, o);
  if (auto* f = std::get_if<Failure>(&data)) return Report(*f, err);
  const Dataset& dataset = std::get<Dataset>(data);
  auto task = CheckTask(dataset, o);
  if (auto* f = std::get_if<Failure>(&task)) return Report(*f, err);
  auto split =
      SplitDataset(dataset, config.train_frac, config.cal_frac, config.seed);
  if (!split.ok()) return Report(DataError(split.status()), err);
  auto model = MakeModel(config, o, *split, std::get<Task>(task));
  if (auto* f = std::get_if<Failure>(&model)) return Report(*f, err);
  const auto& provider = std::get<std::shared_ptr<const ScoreProvider>>(model);
  const Dataset test = Limit(split->test, config.limit);

  absl::StatusOr<std::vector<Explanation>> explanations;
  if (o.explainer == ExplainerKind::kFast) {
    auto explainer = FastExplainer::Create(provider, split->calibration, o.fast);
    if (!explainer.ok()) return Report(RuntimeError(explainer.status()), err);
    explanations = explainer->ExplainBatch(test, config.jobs);
  } else {
    auto explainer =
        BaselineExplainer::Create(provider, split->calibration, o.baseline);
    if (!explainer.ok()) return Report(RuntimeError(explainer.status()), err);
    explanations = explainer->ExplainBatch(test, config.jobs);
  }
  if (!explanations.ok()) {
    return Report(RuntimeError(explanations.status()), err);
  }

  Sink sink(config.out, out);
  if (!sink.ok()) {
    return Report({kExitRuntime, absl::StrCat("--out: cannot write ",
                                              config.out)},
                  err);
  }
  std::ostream& plot = config.out.empty() ? err : out;
  for (const Explanation& e : *explanations) {
    sink.get() << ToJsonLine(e) << "\n";
    if (config.plot) plot << RenderBars(e) << "\n";
  }
  sink.get().flush();
  if (!sink.get()) {
    return Report({kExitRuntime, absl::StrCat("--out: write failed for ",
                                              config.out)},
                  err);
  }
  return kExitOk;
}

int CmdBench(const RunConfig& config, std::ostream& out, std::ostream& err) {
  auto options = Resolve(config);
  if (auto* f = std::get_if<Failure>(&options)) return Report(*f, err);
  const Options& o = std::get<Options>(options);
  if (o.model_kind != "knn") {
    return Report({kExitConfig, "bench refits models and needs --model knn:K"},
                  err);
  }
  if (o.fast.calibration.threshold) {
    return Report({kExitConfig, "bench does not support --threshold"}, err);
  }
  std::vector<ExplainerKind> kinds;
  for (absl::string_view name : absl::StrSplit(config.explainers, ',')) {
    auto kind = ParseExplainer(std::string(name));
    if (!kind.ok()) {
      return Report({kExitConfig, absl::StrCat("--explainers: ",
                                               kind.status().message())},
                    err);
    }
    kinds.push_back(*kind);
  }
  if (kinds.empty()) {
    return Report({kExitConfig, "--explainers: name at least one"}, err);
  }
  if (config.runs < 2 && !(config.skip_stability && config.skip_robustness)) {
    return Report({kExitConfig, "--runs: need at least 2"}, err);
  }
  auto data = LoadData(config, o);
  if (auto* f = std::get_if<Failure>(&data)) return Report(*f, err);
  const Dataset& dataset = std::get<Dataset>(data);
  auto task = CheckTask(dataset, o);
  if (auto* f = std::get_if<Failure>(&task)) return Report(*f, err);

  ExperimentConfig experiment;
  experiment.dataset_name =
      config.data.empty() ? config.synthetic : config.data;
  experiment.knn_k = o.knn_k;
  experiment.train_frac = config.train_frac;
  experiment.cal_frac = config.cal_frac;
  experiment.seed = config.seed;
  experiment.max_test = config.max_test;
  experiment.fast = o.fast;
  experiment.baseline = o.baseline;
  experiment.runs = config.runs;
  experiment.stability = !config.skip_stability;
  experiment.robustness = !config.skip_robustness;

  EvalReport report;
  for (ExplainerKind kind : kinds) {
    if (kind == ExplainerKind::kFast && config.grid) {
      auto grid = RunAblation(dataset, experiment);
      if (!grid.ok()) return Report(RuntimeError(grid.status()), err);
      for (auto& record : grid->records) {
        report.records.push_back(std::move(record));
      }
      continue;
    }
    auto result = RunExperiment(dataset, kind, experiment);
    if (!result.ok()) return Report(RuntimeError(result.status()), err);
    report.records.push_back(std::move(result->record));
  }

  const std::string prefix = config.out.empty() ? "fastcal_report" : config.out;
  for (const auto& [path, text] :
       {std::pair{prefix + ".csv", ReportToCsv(report)},
        std::pair{prefix + ".json", ReportToJson(report).dump(2) + "\n"}}) {
    std::ofstream file(path, std::ios::binary);
    file << text;
    if (!file) {
      return Report({kExitRuntime, absl::StrCat("cannot write ", path)}, err);
    }
  }

  out << absl::StrFormat("%-9s %-28s %12s %12s %10s %11s %11s\n", "explainer",
                         "config", "mean_s", "median_s", "init_s",
                         "stability", "robustness");
  const EvalRecord* fast = nullptr;
  const EvalRecord* baseline = nullptr;
  for (const auto& r : report.records) {
    out << absl::StrFormat("%-9s %-28s %12.6g %12.6g %10.4g %11.4g %11.4g\n",
                           r.explainer, r.config, r.mean_seconds,
                           r.median_seconds, r.init_seconds, r.stability,
                           r.robustness);
    if (r.explainer == "fast" && fast == nullptr) fast = &r;
    if (r.explainer == "baseline" && baseline == nullptr) baseline = &r;
  }
  if (fast != nullptr && baseline != nullptr && fast->mean_seconds > 0) {
    out << absl::StrFormat("speedup (baseline mean / fast mean): %.1fx\n",
                           baseline->mean_seconds / fast->mean_seconds);
  }
  out << "report: " << prefix << ".csv, " << prefix << ".json\n";
  return kExitOk;
}

int CmdPerturb(const RunConfig& config, std::ostream& out, std::ostream& err) {
  auto options = Resolve(config);
  if (auto* f = std::get_if<Failure>(&options)) return Report(*f, err);
  const Options& o = std::get<Options>(options);
  auto data = LoadData(config, o);
  if (auto* f = std::get_if<Failure>(&data)) return Report(*f, err);
  const Dataset& dataset = std::get<Dataset>(data);
  auto split =
      SplitDataset(dataset, config.train_frac, config.cal_frac, config.seed);
  if (!split.ok()) return Report(DataError(split.status()), err);
  auto perturbed = PerturbCalibration(split->calibration, o.fast.perturb);
  if (!perturbed.ok()) return Report(RuntimeError(perturbed.status()), err);

  Sink sink(config.out, out);
  if (!sink.ok()) {
    return Report({kExitRuntime, absl::StrCat("--out: cannot write ",
                                              config.out)},
                  err);
  }
  const Schema& schema = dataset.schema();
  std::ostream& os = sink.get();
  os << "feature,row";
  for (const auto& feature : schema.features) os << "," << QuoteCsv(feature.name);
  os << "\n";
  const Dataset& multiplied = perturbed->multiplied;
  for (size_t f = 0; f < schema.num_features(); ++f) {
    for (size_t j = 0; j < multiplied.num_rows(); ++j) {
      os << QuoteCsv(schema.features[f].name) << "," << j;
      for (size_t g = 0; g < schema.num_features(); ++g) {
        const double v =
            g == f ? perturbed->columns[f][j] : multiplied.value(j, g);
        os << "," << QuoteCsv(schema.FormatValue(g, v));
      }
      os << "\n";
    }
  }
  os.flush();
  return os ? kExitOk : kExitRuntime;
}

int CmdGenerate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.synthetic.empty()) {
    return Report({kExitConfig, "--synthetic is required"}, err);
  }
  auto data = MakeNamed(config.synthetic, config.n, config.seed);
  if (!data.ok()) return Report(ConfigError(data.status()), err);
  Sink sink(config.out, out);
  if (!sink.ok()) {
    return Report({kExitRuntime, absl::StrCat("--out: cannot write ",
                                              config.out)},
                  err);
  }
  if (auto status = WriteCsv(*data, sink.get()); !status.ok()) {
    return Report({kExitRuntime, std::string(status.message())}, err);
  }
  return kExitOk;
}

template <typename T>
void Read(const json& j, const char* key, T* field) {
  if (j.contains(key)) *field = j.at(key).get<T>();
}

void AddOptions(CLI::App* app, RunConfig* c, std::vector<double>* percentiles,
                std::string* threshold) {
  app->add_option("--data", c->data, "input CSV (header row, target last)");
  app->add_option("--synthetic", c->synthetic,
                  "synthetic dataset instead of --data: binary, binary60, "
                  "multiclass, regression, mixed");
  app->add_option("--n", c->n, "rows to generate for --synthetic");
  app->add_option("--target", c->target, "target column name");
  app->add_option("--task", c->task,
                  "auto, binary, multiclass, regression or thresholded");
  app->add_option("--model", c->model, "knn:K or external:PATH");
  app->add_option("--perturbed-scores", c->perturbed_scores,
                  "scores of the exported perturbed calibration objects");
  app->add_option("--train-frac", c->train_frac, "proper-training fraction");
  app->add_option("--cal-frac", c->cal_frac, "calibration fraction");
  app->add_option("--noise-type", c->noise_type, "uniform or gaussian");
  app->add_option("--scale-factor", c->scale_factor,
                  "copies k of the calibration set");
  app->add_option("--severity", c->severity, "noise severity s");
  app->add_option("--mode", c->mode, "permute-noise or noise-only");
  app->add_option("--percentiles", *percentiles,
                  "regression interval percentiles LOW,HIGH")
      ->delimiter(',')
      ->expected(2);
  app->add_option("--threshold", *threshold,
                  "explain p(y <= t) or p(y > t) for regression");
  app->add_option("--direction", c->direction, "above or below");
  app->add_option("--tau", c->tau, "fixed or random");
  app->add_option("--threshold-scoring", c->threshold_scoring,
                  "leave-one-out or in-sample");
  app->add_option("--seed", c->seed,
                  "seed for splitting, perturbation and generation "
                  "(default $FASTCAL_SEED or 42)");
  app->add_option("--out", c->out, "output file (bench: report prefix)");
  app->add_option("--explainer", c->explainer, "fast or baseline");
  app->add_flag("--plot", c->plot, "render explanations as text bars");
  app->add_option("--jobs", c->jobs, "worker threads");
  app->add_option("--limit", c->limit, "explain at most this many instances");
  app->add_option("--explainers", c->explainers, "bench: comma list");
  app->add_option("--runs", c->runs, "bench: stability/robustness runs R");
  app->add_flag("--grid", c->grid, "bench: 40-configuration ablation grid");
  app->add_option("--max-test", c->max_test,
                  "bench: test instances per experiment");
  app->add_flag("--skip-stability", c->skip_stability, "bench");
  app->add_flag("--skip-robustness", c->skip_robustness, "bench");
}

}  // namespace

ordered_json RunConfig::ToJson() const {
  ordered_json j;
  j["command"] = command;
  j["data"] = data;
  j["synthetic"] = synthetic;
  j["n"] = n;
  j["target"] = target;
  j["task"] = task;
  j["model"] = model;
  j["perturbed_scores"] = perturbed_scores;
  j["train_frac"] = train_frac;
  j["cal_frac"] = cal_frac;
  j["noise_type"] = noise_type;
  j["scale_factor"] = scale_factor;
  j["severity"] = severity;
  j["mode"] = mode;
  j["low_percentile"] = low_percentile;
  j["high_percentile"] = high_percentile;
  j["threshold"] = threshold ? ordered_json(*threshold) : ordered_json(nullptr);
  j["direction"] = direction;
  j["tau"] = tau;
  j["threshold_scoring"] = threshold_scoring;
  j["seed"] = seed;
  j["out"] = out;
  j["explainer"] = explainer;
  j["plot"] = plot;
  j["jobs"] = jobs;
  j["limit"] = limit;
  j["explainers"] = explainers;
  j["runs"] = runs;
  j["grid"] = grid;
  j["max_test"] = max_test;
  j["skip_stability"] = skip_stability;
  j["skip_robustness"] = skip_robustness;
  return j;
}

absl::StatusOr<RunConfig> RunConfig::FromJson(const json& j) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError("config must be a JSON object");
  }
  static const std::vector<std::string> kKeys = {
      "command", "data", "synthetic", "n", "target", "task", "model",
      "perturbed_scores", "train_frac", "cal_frac", "noise_type",
      "scale_factor", "severity", "mode", "low_percentile", "high_percentile",
      "threshold", "direction", "tau", "threshold_scoring", "seed", "out",
      "explainer", "plot", "jobs", "limit", "explainers", "runs", "grid",
      "max_test", "skip_stability", "skip_robustness"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown config key '", key, "'"));
    }
  }
  RunConfig c;
  try {
    Read(j, "command", &c.command);
    Read(j, "data", &c.data);
    Read(j, "synthetic", &c.synthetic);
    Read(j, "n", &c.n);
    Read(j, "target", &c.target);
    Read(j, "task", &c.task);
    Read(j, "model", &c.model);
    Read(j, "perturbed_scores", &c.perturbed_scores);
    Read(j, "train_frac", &c.train_frac);
    Read(j, "cal_frac", &c.cal_frac);
    Read(j, "noise_type", &c.noise_type);
    Read(j, "scale_factor", &c.scale_factor);
    Read(j, "severity", &c.severity);
    Read(j, "mode", &c.mode);
    Read(j, "low_percentile", &c.low_percentile);
    Read(j, "high_percentile", &c.high_percentile);
    if (j.contains("threshold") && !j.at("threshold").is_null()) {
      c.threshold = j.at("threshold").get<double>();
    }
    Read(j, "direction", &c.direction);
    Read(j, "tau", &c.tau);
    Read(j, "threshold_scoring", &c.threshold_scoring);
    Read(j, "seed", &c.seed);
    Read(j, "out", &c.out);
    Read(j, "explainer", &c.explainer);
    Read(j, "plot", &c.plot);
    Read(j, "jobs", &c.jobs);
    Read(j, "limit", &c.limit);
    Read(j, "explainers", &c.explainers);
    Read(j, "runs", &c.runs);
    Read(j, "grid", &c.grid);
    Read(j, "max_test", &c.max_test);
    Read(j, "skip_stability", &c.skip_stability);
    Read(j, "skip_robustness", &c.skip_robustness);
  } catch (const json::exception& ex) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed config: ", ex.what()));
  }
  return c;
}

int RunCommand(const RunConfig& config, std::ostream& out, std::ostream& err) {
  if (config.command == "explain") return CmdExplain(config, out, err);
  if (config.command == "bench") return CmdBench(config, out, err);
  if (config.command == "perturb") return CmdPerturb(config, out, err);
  if (config.command == "generate") return CmdGenerate(config, out, err);
  err << "error: unknown command '" << config.command << "'\n";
  return kExitConfig;
}

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  RunConfig config;
  if (const char* env = std::getenv("FASTCAL_SEED"); env != nullptr) {
    if (!absl::SimpleAtoi(env, &config.seed)) {
      err << "error: FASTCAL_SEED is not an unsigned integer: " << env << "\n";
      return kExitConfig;
    }
  }
  // The config file supplies defaults that explicit flags override.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) != "--config") continue;
    std::ifstream file(argv[i + 1]);
    if (!file) {
      err << "error: --config: cannot read " << argv[i + 1] << "\n";
      return kExitConfig;
    }
    const json parsed = json::parse(file, nullptr, false);
    if (parsed.is_discarded()) {
      err << "error: --config: " << argv[i + 1] << " is not valid JSON\n";
      return kExitConfig;
    }
    auto loaded = RunConfig::FromJson(parsed);
    if (!loaded.ok()) {
      err << "error: --config: " << loaded.status().message() << "\n";
      return kExitConfig;
    }
    const uint64_t env_seed = config.seed;
    config = *loaded;
    if (!parsed.contains("seed")) config.seed = env_seed;
  }

  CLI::App app{"Calibrated feature-importance explanations with uncertainty."};
  app.name("fastcal");
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file with default settings");
  std::vector<double> percentiles;
  std::string threshold;
  const std::pair<const char*, const char*> commands[] = {
      {"explain", "explain the test partition as JSON Lines"},
      {"bench", "time and score explainers, write an EvalReport"},
      {"perturb", "export the perturbed calibration objects for external "
                  "scoring"},
      {"generate", "write a synthetic dataset as CSV"},
  };
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    AddOptions(sub, &config, &percentiles, &threshold);
    sub->add_option("--config", config_path,
                    "JSON file with default settings");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }
  for (CLI::App* sub : app.get_subcommands()) config.command = sub->get_name();
  if (percentiles.size() == 2) {
    config.low_percentile = percentiles[0];
    config.high_percentile = percentiles[1];
  }
  if (!threshold.empty()) {
    double t = 0;
    if (!absl::SimpleAtod(threshold, &t) || !std::isfinite(t)) {
      err << "error: --threshold: not a finite number: " << threshold << "\n";
      return kExitConfig;
    }
    config.threshold = t;
  }
  return RunCommand(config, out, err);
}

}  // namespace fastcal
