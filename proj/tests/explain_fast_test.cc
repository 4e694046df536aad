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
#include <cmath>
#include <map>
#include <memory>
#include <numeric>

#include "fastcal/synthetic.h"
#include "fastcal/venn_abers.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace fastcal {
namespace {

using testing::Numeric;

struct Fitted {
  std::shared_ptr<const ScoreProvider> model;
  Split split;
};

Fitted Fit(const Dataset& data, Task task, size_t k = 10) {
  auto split = SplitDataset(data, 0.5, 0.25, 42);
  EXPECT_TRUE(split.ok()) << split.status();
  auto model = KnnModel::Fit(split->proper_training, task, {k});
  EXPECT_TRUE(model.ok()) << model.status();
  return {std::shared_ptr<const ScoreProvider>(std::move(*model)),
          std::move(*split)};
}

void ExpectBounded(const Explanation& e, bool probabilistic) {
  EXPECT_LE(e.prediction.low, e.prediction.value);
  EXPECT_LE(e.prediction.value, e.prediction.high);
  if (probabilistic) {
    EXPECT_GE(e.prediction.low, 0);
    EXPECT_LE(e.prediction.high, 1);
  }
  for (const auto& w : e.features) {
    EXPECT_TRUE(std::isfinite(w.weight));
    EXPECT_LE(w.low, w.weight + 1e-12) << w.name;
    EXPECT_LE(w.weight, w.high + 1e-12) << w.name;
    if (probabilistic) {
      EXPECT_GE(w.low, -1);
      EXPECT_LE(w.high, 1);
    }
  }
}

// Calibration pairs (0.1, 0), (0.4, 0), (0.6, 1), (0.9, 1) with recorded
// scores for the 5 * 4 perturbed calibration objects of each feature.
TEST(FastExplainerTest, MatchesVennAbersComposition) {
  const Dataset data =
      Numeric(2, {0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5}, {0, 0, 1, 1, 1, 0}, 2);
  const std::vector<double> cal_scores = {0.1, 0.4, 0.6, 0.9};
  const std::vector<double> test_scores = {0.95, 0.5};
  std::map<int64_t, std::vector<double>> table;
  for (int i = 0; i < 4; ++i) table[i] = {1 - cal_scores[i], cal_scores[i]};
  for (int i = 0; i < 2; ++i) table[4 + i] = {1 - test_scores[i], test_scores[i]};
  auto scores = std::make_shared<ExternalScores>(data.schema_ptr(),
                                                 Task::kBinary, 2, table);
  const std::vector<std::vector<double>> perturbed = {
      {0.2, 0.3, 0.5, 0.7, 0.1, 0.35, 0.8, 0.6, 0.45, 0.4,
       0.9, 0.55, 0.15, 0.25, 0.65, 0.75, 0.05, 0.5, 0.3, 0.85},
      {0.6, 0.4, 0.1, 0.9, 0.6, 0.4, 0.1, 0.9, 0.6, 0.4,
       0.1, 0.9, 0.6, 0.4, 0.1, 0.9, 0.6, 0.4, 0.1, 0.9}};
  for (size_t f = 0; f < 2; ++f) {
    ScoreMatrix m(20, 2);
    for (size_t j = 0; j < 20; ++j) {
      m.values[2 * j] = 1 - perturbed[f][j];
      m.values[2 * j + 1] = perturbed[f][j];
    }
    scores->SetPerturbed(f, std::move(m));
  }
  const size_t cal_rows[] = {0, 1, 2, 3};
  const size_t test_rows[] = {4, 5};
  auto explainer = FastExplainer::Create(scores, data.Subset(cal_rows), {});
  ASSERT_OK(explainer);
  EXPECT_EQ(explainer->perturbed_rows(), 20u);

  const std::vector<int> labels = {0, 0, 1, 1};
  std::vector<int> repeated;
  for (int copy = 0; copy < 5; ++copy) {
    repeated.insert(repeated.end(), labels.begin(), labels.end());
  }
  auto base = VennAbersCalibrator::Create(cal_scores, labels);
  ASSERT_OK(base);
  auto batch = explainer->ExplainBatch(data.Subset(test_rows));
  ASSERT_OK(batch);
  for (size_t i = 0; i < 2; ++i) {
    const Explanation& e = (*batch)[i];
    const auto phi = base->Calibrate(test_scores[i]);
    EXPECT_EQ(e.instance_id, static_cast<int64_t>(4 + i));
    EXPECT_DOUBLE_EQ(e.prediction.value, phi.p);
    EXPECT_DOUBLE_EQ(e.prediction.low, phi.low);
    EXPECT_DOUBLE_EQ(e.prediction.high, phi.high);
    for (size_t f = 0; f < 2; ++f) {
      auto cf = VennAbersCalibrator::Create(perturbed[f], repeated);
      ASSERT_OK(cf);
      const auto phi_f = cf->Calibrate(test_scores[i]);
      EXPECT_DOUBLE_EQ(e.features[f].weight, phi.p - phi_f.p);
      EXPECT_DOUBLE_EQ(e.features[f].low, phi.p - phi_f.high);
      EXPECT_DOUBLE_EQ(e.features[f].high, phi.p - phi_f.low);
    }
  }
  EXPECT_NEAR((*batch)[0].prediction.value, 0.75, 1e-12);
}

TEST(FastExplainerTest, ExternalScoresNeedPerturbedTables) {
  const Dataset data = Numeric(1, {0, 1, 2}, {0, 1, 1}, 2);
  std::map<int64_t, std::vector<double>> table = {
      {0, {0.8, 0.2}}, {1, {0.3, 0.7}}, {2, {0.1, 0.9}}};
  auto scores = std::make_shared<ExternalScores>(data.schema_ptr(),
                                                 Task::kBinary, 2, table);
  auto explainer = FastExplainer::Create(scores, data, {});
  ASSERT_FALSE(explainer.ok());
  EXPECT_NE(explainer.status().message().find("perturbed"), std::string::npos);
}

Dataset WithConstantCategory(size_t n) {
  auto mixed = MakeMixedBinary(n, 5);
  auto schema = std::make_shared<Schema>(mixed->schema());
  schema->features.push_back({"site", FeatureKind::kCategorical, {"a"}});
  std::vector<double> values;
  for (size_t i = 0; i < n; ++i) {
    values.insert(values.end(), mixed->row(i).begin(), mixed->row(i).end());
    values.push_back(0);
  }
  return *Dataset::Create(schema, values, std::vector<double>(
                                              mixed->targets().begin(),
                                              mixed->targets().end()));
}

// With C_f equal to C the weight is zero and its interval is the base
// interval mirrored around zero: [phi - phi_high, phi - phi_low].
TEST(FastExplainerTest, IdentityPerturbationGivesZeroWeight) {
  const Fitted fitted = Fit(WithConstantCategory(400), Task::kBinary);
  FastExplainerOptions options;
  options.perturb.scale_factor = 1;
  options.perturb.severity = 0;
  auto explainer =
      FastExplainer::Create(fitted.model, fitted.split.calibration, options);
  ASSERT_OK(explainer);
  EXPECT_EQ(explainer->num_features(), 5u);
  auto batch = explainer->ExplainBatch(fitted.split.test);
  ASSERT_OK(batch);
  for (const auto& e : *batch) {
    EXPECT_EQ(e.features[4].weight, 0.0);
    EXPECT_EQ(e.features[4].low, e.prediction.value - e.prediction.high);
    EXPECT_EQ(e.features[4].high, e.prediction.value - e.prediction.low);
  }
}

TEST(FastExplainerTest, DefaultConfigUsesFiveCopies) {
  const Fitted fitted = Fit(*MakeNamed("binary", 400, 1), Task::kBinary);
  auto explainer =
      FastExplainer::Create(fitted.model, fitted.split.calibration, {});
  ASSERT_OK(explainer);
  EXPECT_EQ(explainer->num_features(), 10u);
  EXPECT_EQ(explainer->perturbed_rows(),
            5 * fitted.split.calibration.num_rows());
  EXPECT_GT(explainer->init_seconds(), 0);
}

TEST(FastExplainerTest, BoundsAndBatchConsistency) {
  const Fitted fitted = Fit(*MakeMixedBinary(400, 2), Task::kBinary);
  auto explainer =
      FastExplainer::Create(fitted.model, fitted.split.calibration, {});
  ASSERT_OK(explainer);
  auto batch = explainer->ExplainBatch(fitted.split.test, 3);
  ASSERT_OK(batch);
  ASSERT_EQ(batch->size(), fitted.split.test.num_rows());
  for (size_t i = 0; i < batch->size(); ++i) {
    ExpectBounded((*batch)[i], true);
    auto single = explainer->Explain(fitted.split.test, i);
    ASSERT_OK(single);
    EXPECT_EQ(ToJsonLine(*single), ToJsonLine((*batch)[i]));
    EXPECT_EQ(single->positive_class, "1");
    EXPECT_EQ(single->perturbed_calls, 0u);
  }
  auto empty = explainer->ExplainBatch(fitted.split.test.Subset({}));
  ASSERT_OK(empty);
  EXPECT_TRUE(empty->empty());
}

TEST(FastExplainerTest, DeterministicInit) {
  const Fitted fitted = Fit(*MakeMixedBinary(300, 4), Task::kBinary);
  FastExplainerOptions options;
  options.perturb.noise_type = NoiseType::kGaussian;
  auto a = FastExplainer::Create(fitted.model, fitted.split.calibration, options);
  auto b = FastExplainer::Create(fitted.model, fitted.split.calibration, options);
  ASSERT_OK(a);
  ASSERT_OK(b);
  auto ea = a->ExplainBatch(fitted.split.test);
  auto eb = b->ExplainBatch(fitted.split.test);
  auto again = a->ExplainBatch(fitted.split.test);
  ASSERT_OK(ea);
  ASSERT_OK(eb);
  ASSERT_OK(again);
  for (size_t i = 0; i < ea->size(); ++i) {
    EXPECT_EQ(ToJsonLine((*ea)[i]), ToJsonLine((*eb)[i]));
    EXPECT_EQ(ToJsonLine((*ea)[i]), ToJsonLine((*again)[i]));
  }
}

TEST(FastExplainerTest, InformativeFeatureDominates) {
  const Fitted fitted = Fit(*MakeNamed("binary", 800, 3), Task::kBinary);
  auto explainer =
      FastExplainer::Create(fitted.model, fitted.split.calibration, {});
  ASSERT_OK(explainer);
  auto batch = explainer->ExplainBatch(fitted.split.test);
  ASSERT_OK(batch);
  std::vector<double> mean_abs(10, 0);
  for (const auto& e : *batch) {
    for (size_t f = 0; f < 10; ++f) mean_abs[f] += std::abs(e.features[f].weight);
  }
  EXPECT_EQ(std::max_element(mean_abs.begin(), mean_abs.end()) -
                mean_abs.begin(),
            0);
}

TEST(FastExplainerTest, RegressionRankIsConstant) {
  const Fitted fitted = Fit(*MakeNamed("regression", 800, 6), Task::kRegression);
  auto explainer =
      FastExplainer::Create(fitted.model, fitted.split.calibration, {});
  ASSERT_OK(explainer);
  EXPECT_EQ(explainer->kind(), ExplanationKind::kRegression);
  auto batch = explainer->ExplainBatch(fitted.split.test);
  ASSERT_OK(batch);
  const auto ranking = [](const Explanation& e) {
    std::vector<size_t> order(e.features.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return e.features[a].weight > e.features[b].weight;
    });
    return order;
  };
  const auto first = ranking(batch->front());
  for (const auto& e : *batch) {
    ExpectBounded(e, false);
    EXPECT_EQ(ranking(e), first);
    for (size_t f = 0; f < e.features.size(); ++f) {
      EXPECT_NEAR(e.features[f].weight, batch->front().features[f].weight,
                  1e-12);
    }
  }
}

TEST(FastExplainerTest, MulticlassExplainsCalibratedArgmax) {
  const Fitted fitted = Fit(*MakeNamed("multiclass", 600, 2), Task::kMulticlass);
  auto explainer =
      FastExplainer::Create(fitted.model, fitted.split.calibration, {});
  ASSERT_OK(explainer);
  auto outputs = fitted.model->Predict(fitted.split.test);
  ASSERT_OK(outputs);
  auto batch = explainer->ExplainBatch(fitted.split.test);
  ASSERT_OK(batch);
  const TaskCalibrator& base = explainer->base_calibrator();
  for (size_t i = 0; i < batch->size(); ++i) {
    const Explanation& e = (*batch)[i];
    ExpectBounded(e, true);
    const auto key = static_cast<uint64_t>(e.instance_id);
    double best = -1;
    size_t best_class = 0;
    for (size_t c = 0; c < 3; ++c) {
      const double p = base.Calibrate(outputs->row(i), c, key).value;
      if (p > best) {
        best = p;
        best_class = c;
      }
    }
    EXPECT_EQ(e.positive_class, std::to_string(best_class));
    EXPECT_EQ(e.prediction.value, best);
  }
}

TEST(FastExplainerTest, ThresholdedDirectionsAreComplementary) {
  const Fitted fitted = Fit(*MakeNamed("regression", 600, 8), Task::kRegression);
  FastExplainerOptions below;
  below.calibration.threshold = ThresholdSpec{1.0, ThresholdDirection::kBelow};
  FastExplainerOptions above = below;
  above.calibration.threshold->direction = ThresholdDirection::kAbove;
  auto eb = FastExplainer::Create(fitted.model, fitted.split.calibration, below);
  auto ea = FastExplainer::Create(fitted.model, fitted.split.calibration, above);
  ASSERT_OK(eb);
  ASSERT_OK(ea);
  EXPECT_EQ(ea->kind(), ExplanationKind::kThresholded);
  auto xb = eb->ExplainBatch(fitted.split.test);
  auto xa = ea->ExplainBatch(fitted.split.test);
  ASSERT_OK(xb);
  ASSERT_OK(xa);
  for (size_t i = 0; i < xa->size(); ++i) {
    const Explanation& a = (*xa)[i];
    const Explanation& b = (*xb)[i];
    ExpectBounded(a, true);
    EXPECT_NEAR(a.prediction.value, 1 - b.prediction.value, 1e-12);
    EXPECT_NEAR(a.prediction.low, 1 - b.prediction.high, 1e-12);
    for (size_t f = 0; f < a.features.size(); ++f) {
      EXPECT_NEAR(a.features[f].weight, -b.features[f].weight, 1e-12);
    }
    ASSERT_TRUE(a.threshold.has_value());
    EXPECT_EQ(a.threshold->t, 1.0);
  }
}

TEST(FastExplainerTest, ThresholdRequiresRegression) {
  const Fitted fitted = Fit(*MakeMixedBinary(200, 1), Task::kBinary);
  FastExplainerOptions options;
  options.calibration.threshold = ThresholdSpec{0.5};
  EXPECT_FALSE(
      FastExplainer::Create(fitted.model, fitted.split.calibration, options)
          .ok());
  options = {};
  options.perturb.scale_factor = 0;
  EXPECT_FALSE(
      FastExplainer::Create(fitted.model, fitted.split.calibration, options)
          .ok());
}

}  // namespace
}  // namespace fastcal
