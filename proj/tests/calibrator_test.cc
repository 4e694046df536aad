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

#include <vector>

#include "fastcal/cps.h"
#include "fastcal/rng.h"
#include "fastcal/venn_abers.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace fastcal {
namespace {

ScoreMatrix Column(const std::vector<double>& values) {
  ScoreMatrix m(values.size(), 1);
  m.values = values;
  return m;
}

TEST(TaskCalibratorTest, ThresholdedMatchesHandComposition) {
  Rng rng(31);
  std::vector<double> predictions, targets;
  for (int i = 0; i < 60; ++i) {
    const double x = rng.StandardNormal();
    predictions.push_back(x);
    targets.push_back(x + rng.StandardNormal());
  }
  const double t = 0.3;
  for (auto scoring : {ThresholdScoring::kLeaveOneOut,
                       ThresholdScoring::kInSample}) {
    CalibrationOptions options;
    options.threshold = ThresholdSpec{t, ThresholdDirection::kBelow};
    options.threshold_scoring = scoring;
    auto calibrator = TaskCalibrator::Create(
        Task::kRegression, options, Column(predictions), targets);
    ASSERT_OK(calibrator);

    std::vector<double> scores;
    std::vector<int> labels;
    for (size_t i = 0; i < predictions.size(); ++i) {
      std::vector<double> residuals;
      for (size_t j = 0; j < predictions.size(); ++j) {
        if (j != i || scoring == ThresholdScoring::kInSample) {
          residuals.push_back(targets[j] - predictions[j]);
        }
      }
      scores.push_back(
          Cps::FromResiduals(residuals)->CpdValue(predictions[i], t));
      labels.push_back(targets[i] <= t ? 1 : 0);
    }
    auto va = VennAbersCalibrator::Create(scores, labels);
    ASSERT_OK(va);
    auto full = Cps::Create(predictions, targets);
    ASSERT_OK(full);
    for (double h : {-2.0, -0.5, 0.0, 0.3, 1.2}) {
      const auto expected = va->Calibrate(full->CpdValue(h, t));
      const std::vector<double> output = {h};
      const Estimate e = calibrator->Calibrate(output, 0, 0);
      EXPECT_EQ(e.value, expected.p);
      EXPECT_EQ(e.low, expected.low);
      EXPECT_EQ(e.high, expected.high);
    }
  }
}

TEST(TaskCalibratorTest, MulticlassIsOneVersusRest) {
  Rng rng(2);
  ScoreMatrix outputs(40, 3);
  std::vector<double> targets(40);
  for (size_t i = 0; i < 40; ++i) {
    double a = rng.UniformDouble(), b = rng.UniformDouble() * (1 - a);
    outputs.mutable_row(i)[0] = a;
    outputs.mutable_row(i)[1] = b;
    outputs.mutable_row(i)[2] = 1 - a - b;
    targets[i] = static_cast<double>(rng.UniformIndex(3));
  }
  auto calibrator =
      TaskCalibrator::Create(Task::kMulticlass, {}, outputs, targets);
  ASSERT_OK(calibrator);
  EXPECT_EQ(calibrator->kind(), ExplanationKind::kMulticlass);
  for (size_t c = 0; c < 3; ++c) {
    std::vector<int> labels(40);
    for (size_t i = 0; i < 40; ++i) labels[i] = targets[i] == c ? 1 : 0;
    auto va = VennAbersCalibrator::Create(outputs.Column(c), labels);
    ASSERT_OK(va);
    const std::vector<double> output = {0.2, 0.5, 0.3};
    const Estimate e = calibrator->Calibrate(output, c, 0);
    EXPECT_EQ(e.value, va->Calibrate(output[c]).p);
  }
}

TEST(TaskCalibratorTest, RegressionUsesMedianAndInterval) {
  CalibrationOptions options;
  options.low_percentile = 20;
  options.high_percentile = 80;
  const std::vector<double> targets = {2, -1, 1, -2};
  auto calibrator = TaskCalibrator::Create(Task::kRegression, options,
                                           Column({0, 0, 0, 0}), targets);
  ASSERT_OK(calibrator);
  const std::vector<double> output = {10};
  const Estimate e = calibrator->Calibrate(output, 0, 0);
  EXPECT_EQ(e.value, 10);
  EXPECT_EQ(e.low, 8);
  EXPECT_EQ(e.high, 12);
  const Estimate offsets = calibrator->Offsets();
  EXPECT_EQ(offsets.value, 0);
  EXPECT_EQ(offsets.low, -2);
  EXPECT_EQ(offsets.high, 2);
}

TEST(TaskCalibratorTest, Validation) {
  CalibrationOptions threshold;
  threshold.threshold = ThresholdSpec{1};
  EXPECT_FALSE(ValidateCalibrationOptions(Task::kBinary, threshold).ok());
  CalibrationOptions bad;
  bad.low_percentile = 90;
  bad.high_percentile = 10;
  EXPECT_FALSE(ValidateCalibrationOptions(Task::kRegression, bad).ok());
  EXPECT_TRUE(ValidateCalibrationOptions(Task::kRegression, threshold).ok());
  EXPECT_EQ(KindFor(Task::kRegression, threshold),
            ExplanationKind::kThresholded);
  EXPECT_FALSE(ParseDirection("sideways").ok());
}

}  // namespace
}  // namespace fastcal
