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

#include "fastcal/venn_abers.h"

#include <algorithm>
#include <numeric>
#include <vector>

#include "fastcal/isotonic.h"
#include "fastcal/rng.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace fastcal {
namespace {

// Refits from scratch with the general isotonic routine for each label.
VennAbersPrediction ReferenceCalibrate(const std::vector<double>& scores,
                                       const std::vector<int>& labels,
                                       double test_score) {
  double bound[2];
  for (int label = 0; label < 2; ++label) {
    std::vector<IsotonicPoint> points;
    for (size_t i = 0; i < scores.size(); ++i) {
      points.push_back({scores[i], static_cast<double>(labels[i]), 1});
    }
    points.push_back({test_score, static_cast<double>(label), 1});
    bound[label] = FitPava(points)->Evaluate(test_score);
  }
  return {bound[0], bound[1], bound[1] / (1 - bound[0] + bound[1])};
}

VennAbersCalibrator Make(const std::vector<double>& scores,
                         const std::vector<int>& labels) {
  auto c = VennAbersCalibrator::Create(scores, labels);
  EXPECT_TRUE(c.ok()) << c.status();
  return *c;
}

const std::vector<double> kScores = {0.1, 0.4, 0.6, 0.9};
const std::vector<int> kLabels = {0, 0, 1, 1};

TEST(VennAbersTest, WorkedExampleHighScore) {
  const auto r = Make(kScores, kLabels).Calibrate(0.95);
  EXPECT_NEAR(r.low, 2.0 / 3, 1e-12);
  EXPECT_NEAR(r.high, 1.0, 1e-12);
  EXPECT_NEAR(r.p, 0.75, 1e-12);
}

TEST(VennAbersTest, WorkedExampleMiddleScore) {
  const auto r = Make(kScores, kLabels).Calibrate(0.5);
  EXPECT_NEAR(r.low, 0.0, 1e-12);
  EXPECT_NEAR(r.high, 1.0, 1e-12);
  EXPECT_NEAR(r.p, 0.5, 1e-12);
}

TEST(VennAbersTest, RegularizedEstimateFormula) {
  const auto c = Make(kScores, kLabels);
  for (double s : {0.0, 0.1, 0.3, 0.65, 1.0}) {
    const auto r = c.Calibrate(s);
    EXPECT_EQ(r.p, r.high / (1 - r.low + r.high));
  }
  for (double v : {0.0, 0.25, 0.5, 1.0}) EXPECT_EQ(v / (1 - v + v), v);
}

TEST(VennAbersTest, BatchIsElementwise) {
  const auto c = Make(kScores, kLabels);
  EXPECT_TRUE(c.CalibrateBatch({}).empty());
  const std::vector<double> batch = {0.95, 0.5, 0.05, 0.4};
  const auto out = c.CalibrateBatch(batch);
  ASSERT_EQ(out.size(), batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    const auto single = c.Calibrate(batch[i]);
    EXPECT_EQ(out[i].low, single.low);
    EXPECT_EQ(out[i].high, single.high);
    EXPECT_EQ(out[i].p, single.p);
  }
  const std::vector<double> reversed(batch.rbegin(), batch.rend());
  const auto out_rev = c.CalibrateBatch(reversed);
  for (size_t i = 0; i < batch.size(); ++i) {
    EXPECT_EQ(out_rev[i].p, out[batch.size() - 1 - i].p);
  }
}

TEST(VennAbersTest, RejectsInvalidPairs) {
  const auto create = [](std::vector<double> scores, std::vector<int> labels) {
    return VennAbersCalibrator::Create(scores, labels);
  };
  EXPECT_FALSE(create({}, {}).ok());
  EXPECT_FALSE(create({0.5}, {2}).ok());
  EXPECT_FALSE(create({1.5}, {1}).ok());
  EXPECT_FALSE(create({0.5, 0.2}, {1}).ok());
}

TEST(VennAbersTest, RandomCalibratorsMatchReferenceAndProperties) {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t q = 1 + rng.UniformIndex(30);
    // Coarse scores so that ties are common.
    const uint64_t levels = 2 + rng.UniformIndex(20);
    std::vector<double> scores(q);
    std::vector<int> labels(q);
    for (size_t i = 0; i < q; ++i) {
      scores[i] = static_cast<double>(rng.UniformIndex(levels + 1)) /
                  static_cast<double>(levels);
      labels[i] = rng.UniformDouble() < scores[i] ? 1 : 0;
    }
    const auto c = Make(scores, labels);
    double previous_p = -1;
    for (int j = 0; j <= 20; ++j) {
      const double s = j / 20.0;
      const auto r = c.Calibrate(s);
      const auto ref = ReferenceCalibrate(scores, labels, s);
      ASSERT_NEAR(r.low, ref.low, 1e-12);
      ASSERT_NEAR(r.high, ref.high, 1e-12);
      ASSERT_NEAR(r.p, ref.p, 1e-12);
      ASSERT_LE(0.0, r.low);
      ASSERT_LE(r.low, r.p);
      ASSERT_LE(r.p, r.high);
      ASSERT_LE(r.high, 1.0);
      ASSERT_GE(r.p, previous_p - 1e-12) << "trial " << trial << " s " << s;
      previous_p = r.p;
    }
  }
}

// Validity holds over the joint draw of calibration and test data, so test
// predictions from 20 independent q = 1000 calibrators are pooled before
// binning. A single calibrator's isotonic blocks carry sampling error of
// about 0.05 over a tenth of the score range.
TEST(VennAbersTest, CalibratedOnBernoulliScores) {
  Rng rng(1);
  std::vector<std::pair<double, int>> outcomes;
  for (int rep = 0; rep < 20; ++rep) {
    const size_t q = 1000;
    std::vector<double> scores(q);
    std::vector<int> labels(q);
    for (size_t i = 0; i < q; ++i) {
      scores[i] = rng.UniformDouble();
      labels[i] = rng.UniformDouble() < scores[i] ? 1 : 0;
    }
    const auto c = Make(scores, labels);
    for (int j = 0; j < 1000; ++j) {
      const double s = rng.UniformDouble();
      const int y = rng.UniformDouble() < s ? 1 : 0;
      outcomes.emplace_back(c.Calibrate(s).p, y);
    }
  }
  // Stable by p only: ordering ties by label would bias the bin edges.
  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  const size_t n = outcomes.size();
  for (size_t b = 0; b < 10; ++b) {
    double sum_p = 0, sum_y = 0;
    for (size_t i = b * n / 10; i < (b + 1) * n / 10; ++i) {
      sum_p += outcomes[i].first;
      sum_y += outcomes[i].second;
    }
    EXPECT_LE(std::abs(sum_p - sum_y) / (n / 10.0), 0.05) << "bin " << b;
  }
}

}  // namespace
}  // namespace fastcal
