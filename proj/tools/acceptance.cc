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

// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// Exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "fastcal/calibrator.h"
#include "fastcal/cli.h"
#include "fastcal/cps.h"
#include "fastcal/dataset.h"
#include "fastcal/eval.h"
#include "fastcal/explain_baseline.h"
#include "fastcal/explain_fast.h"
#include "fastcal/isotonic.h"
#include "fastcal/models.h"
#include "fastcal/rng.h"
#include "fastcal/synthetic.h"
#include "fastcal/venn_abers.h"

namespace fastcal {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Outcome Fail(const absl::Status& status) { return {false, status.ToString()}; }

struct Fitted {
  std::shared_ptr<const ScoreProvider> model;
  Split split;
};

absl::StatusOr<Fitted> FitBySize(const Dataset& data, Task task,
                                 size_t calibration, size_t test) {
  auto split = SplitDatasetBySize(data, calibration, test, 42);
  if (!split.ok()) return split.status();
  auto model = KnnModel::Fit(split->proper_training, task, {10});
  if (!model.ok()) return model.status();
  return Fitted{std::shared_ptr<const ScoreProvider>(std::move(*model)),
                std::move(*split)};
}

// Minimum weighted squared error over all monotone block partitions.
std::vector<double> BruteForceIsotonic(const std::vector<double>& y,
                                       const std::vector<double>& w) {
  const size_t n = y.size();
  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<double> best;
  for (uint32_t cuts = 0; cuts < (1u << (n - 1)); ++cuts) {
    std::vector<double> fit(n);
    size_t start = 0;
    for (size_t i = 0; i < n; ++i) {
      if (i != n - 1 && !(cuts >> i & 1u)) continue;
      double sw = 0, swy = 0;
      for (size_t j = start; j <= i; ++j) {
        sw += w[j];
        swy += w[j] * y[j];
      }
      for (size_t j = start; j <= i; ++j) fit[j] = swy / sw;
      start = i + 1;
    }
    bool monotone = true;
    for (size_t i = 1; i < n; ++i) monotone &= fit[i - 1] <= fit[i] + 1e-15;
    if (!monotone) continue;
    double sse = 0;
    for (size_t i = 0; i < n; ++i) {
      sse += w[i] * (y[i] - fit[i]) * (y[i] - fit[i]);
    }
    if (sse < best_sse) {
      best_sse = sse;
      best = fit;
    }
  }
  return best;
}

Outcome IsotonicOracle() {
  const auto start = Clock::now();
  Rng rng(1);
  double worst = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const size_t n = 1 + rng.UniformIndex(8);
    std::vector<double> y(n), w(n), fitted(n);
    for (size_t i = 0; i < n; ++i) {
      y[i] = rng.UniformIndex(4) == 0 ? static_cast<double>(rng.UniformIndex(3))
                                      : 4 * rng.UniformDouble() - 2;
      w[i] = 0.1 + 2 * rng.UniformDouble();
    }
    PoolAdjacentViolators(y, w, fitted);
    const std::vector<double> oracle = BruteForceIsotonic(y, w);
    for (size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(fitted[i] - oracle[i]));
    }
  }
  const double seconds = SecondsSince(start);
  return {worst <= 1e-9 && seconds < 5,
          absl::StrFormat("max |pava - oracle| = %.2g, %.3f s", worst,
                          seconds)};
}

Outcome VennAbersExample() {
  const std::vector<double> scores = {0.1, 0.4, 0.6, 0.9};
  const std::vector<int> labels = {0, 0, 1, 1};
  auto example = VennAbersCalibrator::Create(scores, labels);
  if (!example.ok()) return Fail(example.status());
  const VennAbersPrediction r = example->Calibrate(0.95);
  const bool exact = std::abs(r.low - 2.0 / 3) <= 1e-9 &&
                     std::abs(r.high - 1) <= 1e-9 &&
                     std::abs(r.p - 0.75) <= 1e-9;

  Rng rng(2);
  size_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t q = 1 + rng.UniformIndex(30);
    std::vector<double> s(q);
    std::vector<int> y(q);
    for (size_t i = 0; i < q; ++i) {
      s[i] = rng.UniformIndex(3) == 0 ? rng.UniformIndex(5) / 4.0
                                      : rng.UniformDouble();
      y[i] = rng.UniformDouble() < s[i] ? 1 : 0;
    }
    auto c = VennAbersCalibrator::Create(s, y);
    if (!c.ok()) return Fail(c.status());
    VennAbersPrediction previous{};
    for (int step = 0; step <= 20; ++step) {
      const VennAbersPrediction p = c->Calibrate(step / 20.0);
      violations += !(p.low <= p.p && p.p <= p.high);
      if (step > 0) {
        violations += p.low < previous.low - 1e-12 ||
                      p.high < previous.high - 1e-12 ||
                      p.p < previous.p - 1e-12;
      }
      previous = p;
    }
  }
  return {exact && violations == 0,
          absl::StrFormat("(%.4f, %.4f, %.4f); %d property violations", r.low,
                          r.high, r.p, violations)};
}

Outcome CpsExample() {
  auto c = Cps::FromResiduals({2, -1, 1, -2});
  if (!c.ok()) return Fail(c.status());
  auto interval = c->QueryInterval(10, 20, 80);
  if (!interval.ok()) return Fail(interval.status());
  const double above = c->CpdValue(10, 11.5);
  const double tie = c->CpdValue(10, 9);
  const double median = c->QueryMedian(10);
  return {above == 0.7 && tie == 0.4 && interval->lower == 8 &&
              interval->upper == 12 && median == 10,
          absl::StrFormat("cpd(11.5)=%g cpd(9)=%g interval=[%g, %g] median=%g",
                          above, tie, interval->lower, interval->upper,
                          median)};
}

// Worst per-decile gap between mean predicted probability and observed
// frequency, deciles taken over predictions sorted stably by probability.
double WorstDecileGap(std::vector<std::pair<double, int>> outcomes) {
  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  const size_t n = outcomes.size();
  double worst = 0;
  for (size_t b = 0; b < 10; ++b) {
    double sum_p = 0, sum_y = 0;
    const size_t lo = b * n / 10, hi = (b + 1) * n / 10;
    for (size_t i = lo; i < hi; ++i) {
      sum_p += outcomes[i].first;
      sum_y += outcomes[i].second;
    }
    worst = std::max(worst,
                     std::abs(sum_p - sum_y) / static_cast<double>(hi - lo));
  }
  return worst;
}

Outcome CpsCoverage() {
  const auto start = Clock::now();
  Rng rng(2026);
  const auto mean = [](double x) { return 3 * x - 1; };
  std::vector<double> predictions, targets;
  for (int i = 0; i < 200; ++i) {
    const double x = rng.StandardNormal();
    predictions.push_back(mean(x));
    targets.push_back(mean(x) + rng.StandardNormal());
  }
  auto small = Cps::Create(predictions, targets);
  if (!small.ok()) return Fail(small.status());
  int covered = 0;
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.StandardNormal();
    const double y = mean(x) + rng.StandardNormal();
    auto interval = small->QueryInterval(mean(x), 5, 95);
    if (!interval.ok()) return Fail(interval.status());
    covered += interval->lower <= y && y <= interval->upper;
  }
  const double coverage = covered / 1000.0;

  predictions.clear();
  targets.clear();
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.StandardNormal();
    predictions.push_back(2 * x);
    targets.push_back(2 * x + rng.StandardNormal());
  }
  auto large = Cps::Create(predictions, targets);
  if (!large.ok()) return Fail(large.status());
  std::vector<std::pair<double, int>> outcomes(20000);
  for (auto& [p, hit] : outcomes) {
    const double x = rng.StandardNormal();
    const double y = 2 * x + rng.StandardNormal();
    const double t = 4 * rng.UniformDouble() - 2;
    p = large->QueryThresholdProbability(2 * x, t);
    hit = y <= t;
  }
  const double gap = WorstDecileGap(std::move(outcomes));
  const double seconds = SecondsSince(start);
  return {coverage >= 0.87 && coverage <= 0.93 && gap <= 0.05 && seconds < 30,
          absl::StrFormat("coverage %.3f, worst decile gap %.3f, %.3f s",
                          coverage, gap, seconds)};
}

Outcome Determinism() {
  const fs::path dir = fs::temp_directory_path() / "fastcal_acceptance";
  fs::create_directories(dir);
  const std::string data = (dir / "mixed.csv").string();
  auto generated = MakeNamed("mixed", 400, 5);
  if (!generated.ok()) return Fail(generated.status());
  if (auto status = WriteCsv(*generated, data); !status.ok()) {
    return Fail(status);
  }
  std::string outputs[2];
  for (int run = 0; run < 2; ++run) {
    const std::string path = (dir / absl::StrFormat("run%d.jsonl", run)).string();
    const char* argv[] = {"fastcal", "explain", "--data", data.c_str(),
                          "--task",  "binary",  "--seed", "11",
                          "--out",   path.c_str()};
    std::ostringstream out, err;
    if (const int code = RunCli(10, argv, out, err); code != kExitOk) {
      return {false, absl::StrFormat("explain exited %d: %s", code, err.str())};
    }
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    outputs[run] = buffer.str();
  }
  fs::remove_all(dir);
  return {!outputs[0].empty() && outputs[0] == outputs[1],
          absl::StrFormat("%d bytes per run, identical: %s", outputs[0].size(),
                          outputs[0] == outputs[1] ? "yes" : "no")};
}

Outcome InformativeFeature() {
  auto data = MakeBinary(800, 10, 1, 6);
  if (!data.ok()) return Fail(data.status());
  auto fitted = FitBySize(*data, Task::kBinary, 200, 100);
  if (!fitted.ok()) return Fail(fitted.status());
  auto explainer =
      FastExplainer::Create(fitted->model, fitted->split.calibration, {});
  if (!explainer.ok()) return Fail(explainer.status());
  auto batch = explainer->ExplainBatch(fitted->split.test);
  if (!batch.ok()) return Fail(batch.status());
  std::vector<double> mean_abs(10, 0);
  for (const auto& e : *batch) {
    for (size_t f = 0; f < 10; ++f) {
      mean_abs[f] += std::abs(e.features[f].weight) / batch->size();
    }
  }
  const size_t top =
      std::max_element(mean_abs.begin(), mean_abs.end()) - mean_abs.begin();
  double runner_up = 0;
  for (size_t f = 1; f < 10; ++f) runner_up = std::max(runner_up, mean_abs[f]);
  return {top == 0,
          absl::StrFormat("mean |w|: x1 %.4f, best other %.4f", mean_abs[0],
                          runner_up)};
}

Outcome RegressionRankConstancy() {
  auto data = MakeNamed("regression", 800, 6);
  if (!data.ok()) return Fail(data.status());
  auto fitted = FitBySize(*data, Task::kRegression, 200, 100);
  if (!fitted.ok()) return Fail(fitted.status());
  auto explainer =
      FastExplainer::Create(fitted->model, fitted->split.calibration, {});
  if (!explainer.ok()) return Fail(explainer.status());
  auto batch = explainer->ExplainBatch(fitted->split.test);
  if (!batch.ok()) return Fail(batch.status());
  const auto ranking = [](const Explanation& e) {
    std::vector<size_t> order(e.features.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return e.features[a].weight > e.features[b].weight;
    });
    return order;
  };
  const std::vector<size_t> first = ranking(batch->front());
  size_t differing = 0;
  for (const auto& e : *batch) differing += ranking(e) != first;
  return {differing == 0 && batch->size() == 100,
          absl::StrFormat("%d of %d instances differ from the first ranking",
                          differing, batch->size())};
}

struct SpeedupTimings {
  TimingResult fast;
  TimingResult baseline;
  double seconds = 0;
};

absl::StatusOr<SpeedupTimings> MeasureSpeedup() {
  const auto start = Clock::now();
  auto data = MakeNamed("binary60", 800, 8);
  if (!data.ok()) return data.status();
  auto fitted = FitBySize(*data, Task::kBinary, 200, 100);
  if (!fitted.ok()) return fitted.status();
  const Dataset& test = fitted->split.test;

  std::optional<FastExplainer> fast;
  auto fast_timing = MeasureTime(
      [&]() -> absl::Status {
        auto created =
            FastExplainer::Create(fitted->model, fitted->split.calibration, {});
        if (!created.ok()) return created.status();
        fast.emplace(std::move(*created));
        return absl::OkStatus();
      },
      [&](size_t i) { return fast->Explain(test, i).status(); },
      test.num_rows());
  if (!fast_timing.ok()) return fast_timing.status();

  std::optional<BaselineExplainer> baseline;
  auto baseline_timing = MeasureTime(
      [&]() -> absl::Status {
        auto created = BaselineExplainer::Create(
            fitted->model, fitted->split.calibration, {});
        if (!created.ok()) return created.status();
        baseline.emplace(std::move(*created));
        return absl::OkStatus();
      },
      [&](size_t i) { return baseline->Explain(test, i).status(); },
      test.num_rows());
  if (!baseline_timing.ok()) return baseline_timing.status();
  return SpeedupTimings{*fast_timing, *baseline_timing, SecondsSince(start)};
}

Outcome Speedup(const absl::StatusOr<SpeedupTimings>& timings) {
  if (!timings.ok()) return Fail(timings.status());
  const double ratio =
      timings->baseline.mean_seconds / timings->fast.mean_seconds;
  return {ratio >= 10 && timings->seconds < 60,
          absl::StrFormat("fast %.1f us, baseline %.1f us per instance, "
                          "speedup %.1fx, %.2f s total",
                          1e6 * timings->fast.mean_seconds,
                          1e6 * timings->baseline.mean_seconds, ratio,
                          timings->seconds)};
}

Outcome InitAmortization(const absl::StatusOr<SpeedupTimings>& timings) {
  if (!timings.ok()) return Fail(timings.status());
  const double n = static_cast<double>(timings->fast.per_instance.size());
  const double fast_total =
      timings->fast.init_seconds + n * timings->fast.mean_seconds;
  const double baseline_total = n * timings->baseline.mean_seconds;
  return {fast_total < baseline_total,
          absl::StrFormat("fast init %.4f s + %d explains %.4f s = %.4f s vs "
                          "baseline %.4f s",
                          timings->fast.init_seconds, timings->fast.per_instance.size(),
                          n * timings->fast.mean_seconds, fast_total,
                          baseline_total)};
}

Outcome ThresholdedComposite() {
  const RegressionTruth truth{{3, -2, 1, 0.5, 0}, 1};
  const double t = 1;
  auto train = MakeRegression(1000, truth, 10);
  auto calibration = MakeRegression(1000, truth, 11);
  auto test = MakeRegression(20000, truth, 12);
  if (!train.ok() || !calibration.ok() || !test.ok()) {
    return {false, "data generation failed"};
  }
  auto model = KnnModel::Fit(*train, Task::kRegression, {10});
  if (!model.ok()) return Fail(model.status());
  auto cal_outputs = (*model)->Predict(*calibration);
  auto test_outputs = (*model)->Predict(*test);
  if (!cal_outputs.ok()) return Fail(cal_outputs.status());
  if (!test_outputs.ok()) return Fail(test_outputs.status());
  CalibrationOptions options;
  options.threshold = ThresholdSpec{t, ThresholdDirection::kAbove};
  auto composite = TaskCalibrator::Create(Task::kRegression, options,
                                          *cal_outputs, calibration->targets());
  if (!composite.ok()) return Fail(composite.status());
  std::vector<std::pair<double, int>> outcomes(test->num_rows());
  for (size_t i = 0; i < test->num_rows(); ++i) {
    const Estimate p = composite->Calibrate(test_outputs->row(i), 0, i);
    outcomes[i] = {p.value, test->targets()[i] > t ? 1 : 0};
  }
  const double gap = WorstDecileGap(std::move(outcomes));
  return {gap <= 0.05,
          absl::StrFormat("worst decile |mean p(y > %g) - frequency| = %.3f", t,
                          gap)};
}

bool ProbabilityBounded(const Explanation& e) {
  const auto in = [](double v, double lo, double hi) {
    return std::isfinite(v) && lo <= v && v <= hi;
  };
  if (e.kind == ExplanationKind::kRegression) {
    if (!std::isfinite(e.prediction.value)) return false;
    for (const auto& w : e.features) {
      if (!std::isfinite(w.weight) || !(w.low <= w.weight + 1e-12) ||
          !(w.weight <= w.high + 1e-12)) {
        return false;
      }
    }
    return true;
  }
  if (!in(e.prediction.value, 0, 1) || !in(e.prediction.low, 0, 1) ||
      !in(e.prediction.high, 0, 1)) {
    return false;
  }
  for (const auto& w : e.features) {
    if (!in(w.weight, -1, 1) || !in(w.low, -1, 1) || !in(w.high, -1, 1)) {
      return false;
    }
  }
  return true;
}

Outcome GridHealth() {
  const auto start = Clock::now();
  size_t runs = 0, unbounded = 0, datasets = 0;
  ExperimentConfig config;
  config.max_test = 20;
  config.runs = 2;
  for (const std::string& name : SyntheticNames()) {
    auto data = MakeNamed(name, 400, 42);
    if (!data.ok()) return Fail(data.status());
    config.dataset_name = name;
    auto report = RunAblation(
        *data, config, [&](const ExperimentResult& result) {
          ++runs;
          for (const auto& e : result.explanations) {
            unbounded += !ProbabilityBounded(e);
          }
          return absl::OkStatus();
        });
    if (!report.ok()) {
      return {false, absl::StrFormat("%s: %s", name, report.status().ToString())};
    }
    auto reparsed = ReportFromJson(nlohmann::json::parse(
        ReportToJson(*report).dump()));
    if (!reparsed.ok() || !(*reparsed == *report) ||
        report->records.size() != 40) {
      return {false, absl::StrFormat("%s: malformed report", name)};
    }
    for (const auto& r : report->records) {
      for (double v : {r.mean_seconds, r.median_seconds, r.init_seconds,
                       r.stability, r.robustness, r.prediction_variance}) {
        if (!std::isfinite(v) || v < 0) {
          return {false, absl::StrFormat("%s %s: bad metric", name, r.config)};
        }
      }
    }
    ++datasets;
  }
  return {unbounded == 0,
          absl::StrFormat("%d datasets x 40 configs = %d runs, %d unbounded "
                          "explanations, %.1f s",
                          datasets, runs, unbounded, SecondsSince(start))};
}

}  // namespace
}  // namespace fastcal

int main() {
  using fastcal::Outcome;
  const auto speedup = fastcal::MeasureSpeedup();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria =
      {
          {"isotonic oracle equivalence", fastcal::IsotonicOracle},
          {"venn-abers worked example and properties",
           fastcal::VennAbersExample},
          {"cps exactness", fastcal::CpsExample},
          {"cps coverage and threshold calibration", fastcal::CpsCoverage},
          {"determinism", fastcal::Determinism},
          {"informative feature", fastcal::InformativeFeature},
          {"regression rank constancy", fastcal::RegressionRankConstancy},
          {"speedup", [&] { return fastcal::Speedup(speedup); }},
          {"init amortization", [&] { return fastcal::InitAmortization(speedup); }},
          {"thresholded composite calibration",
           fastcal::ThresholdedComposite},
          {"ablation grid health", fastcal::GridHealth},
      };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const Outcome outcome = criteria[i].second();
    failures += !outcome.pass;
    std::printf("%s %2zu %s: %s\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
