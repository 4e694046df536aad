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

#include "fastcal/isotonic.h"

#include <cmath>
#include <limits>
#include <vector>

#include "fastcal/rng.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace fastcal {
namespace {

// Enumerates every split of the sequence into contiguous blocks, fits each
// block by its weighted mean and keeps the monotone candidate with the
// smallest weighted squared error.
std::vector<double> BruteForceIsotonic(const std::vector<double>& y,
                                       const std::vector<double>& w) {
  const size_t n = y.size();
  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<double> best;
  for (uint32_t cuts = 0; cuts < (1u << (n - 1)); ++cuts) {
    std::vector<double> fit(n);
    size_t start = 0;
    for (size_t i = 0; i < n; ++i) {
      const bool end = i == n - 1 || (cuts >> i & 1u);
      if (!end) continue;
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
    for (size_t i = 0; i < n; ++i) sse += w[i] * (y[i] - fit[i]) * (y[i] - fit[i]);
    if (sse < best_sse) {
      best_sse = sse;
      best = fit;
    }
  }
  return best;
}

std::vector<double> Pava(const std::vector<double>& y,
                         const std::vector<double>& w) {
  std::vector<double> fitted(y.size());
  PoolAdjacentViolators(y, w, fitted);
  return fitted;
}

TEST(PavaTest, MonotoneInputIsUnchanged) {
  EXPECT_EQ(Pava({0, 0, 1, 1}, {1, 1, 1, 1}),
            (std::vector<double>{0, 0, 1, 1}));
}

TEST(PavaTest, SmallExamplesMatchOracle) {
  EXPECT_EQ(BruteForceIsotonic({3, 1, 2}, {1, 1, 1}),
            (std::vector<double>{2, 2, 2}));
  EXPECT_EQ(Pava({3, 1, 2}, {1, 1, 1}), (std::vector<double>{2, 2, 2}));

  const std::vector<double> y = {0, 0, 1, 1, 0};
  const std::vector<double> w(5, 1.0);
  const std::vector<double> expected = {0, 0, 2.0 / 3, 2.0 / 3, 2.0 / 3};
  const auto oracle = BruteForceIsotonic(y, w);
  const auto fitted = Pava(y, w);
  for (size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(oracle[i], expected[i], 1e-15);
    EXPECT_NEAR(fitted[i], expected[i], 1e-15);
  }
}

TEST(PavaTest, RandomInstancesMatchBruteForce) {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const size_t n = 1 + rng.UniformIndex(8);
    std::vector<double> y(n), w(n);
    for (size_t i = 0; i < n; ++i) {
      y[i] = rng.UniformIndex(2) ? rng.UniformDouble() * 4 - 2
                                 : static_cast<double>(rng.UniformIndex(3));
      w[i] = 0.1 + rng.UniformDouble() * 3;
    }
    const auto oracle = BruteForceIsotonic(y, w);
    const auto fitted = Pava(y, w);
    for (size_t i = 0; i < n; ++i) {
      ASSERT_NEAR(fitted[i], oracle[i], 1e-9) << "trial " << trial;
    }
  }
}

TEST(PavaTest, MonotoneBoundedAndMeanPreserving) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 1 + rng.UniformIndex(60);
    std::vector<double> y(n), w(n);
    double lo = 1e300, hi = -1e300, sw = 0, swy = 0;
    for (size_t i = 0; i < n; ++i) {
      y[i] = rng.StandardNormal();
      w[i] = 0.5 + rng.UniformDouble();
      lo = std::min(lo, y[i]);
      hi = std::max(hi, y[i]);
      sw += w[i];
      swy += w[i] * y[i];
    }
    const auto fitted = Pava(y, w);
    double swf = 0;
    for (size_t i = 0; i < n; ++i) {
      if (i > 0) {
        EXPECT_LE(fitted[i - 1], fitted[i]);
      }
      EXPECT_GE(fitted[i], lo - 1e-12);
      EXPECT_LE(fitted[i], hi + 1e-12);
      swf += w[i] * fitted[i];
    }
    EXPECT_NEAR(swf / sw, swy / sw, 1e-12);
  }
}

TEST(FitPavaTest, SortsAndMergesEqualX) {
  const std::vector<IsotonicPoint> points = {
      {0.9, 1, 1}, {0.1, 0, 1}, {0.5, 1, 1}, {0.5, 0, 3}};
  auto fit = FitPava(points);
  ASSERT_OK(fit);
  EXPECT_EQ(fit->breakpoints(), (std::vector<double>{0.1, 0.5, 0.9}));
  EXPECT_EQ(fit->fitted(), (std::vector<double>{0, 0.25, 1}));
}

TEST(FitPavaTest, Evaluate) {
  auto fit = FitPava(std::vector<IsotonicPoint>{{0.1, 0, 1}, {0.9, 1, 1}});
  ASSERT_OK(fit);
  EXPECT_EQ(fit->Evaluate(0.9), 1);
  EXPECT_EQ(fit->Evaluate(0.5), 0);
  EXPECT_EQ(fit->Evaluate(-3), 0);
  EXPECT_EQ(fit->Evaluate(5), 1);
}

TEST(FitPavaTest, RejectsBadInput) {
  EXPECT_FALSE(FitPava({}).ok());
  EXPECT_FALSE(FitPava(std::vector<IsotonicPoint>{{0, 1, 0}}).ok());
  EXPECT_FALSE(FitPava(std::vector<IsotonicPoint>{{0, 1, -1}}).ok());
}

}  // namespace
}  // namespace fastcal
