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

#include "fastcal/cps.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fastcal/rng.h"

namespace fastcal {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Counts of curve values strictly below y and at most y. The curve
// prediction + r is non-decreasing in r, so both are binary searches.
struct Counts {
  size_t below = 0;
  size_t at_most = 0;
};

Counts CountCurve(const std::vector<double>& residuals, double prediction,
                  double y) {
  const auto below = std::partition_point(
      residuals.begin(), residuals.end(),
      [&](double r) { return prediction + r < y; });
  const auto at_most = std::partition_point(
      below, residuals.end(), [&](double r) { return prediction + r <= y; });
  return {static_cast<size_t>(below - residuals.begin()),
          static_cast<size_t>(at_most - residuals.begin())};
}

double CpdFromCounts(Counts counts, size_t q, double tau) {
  const double denominator = static_cast<double>(q + 1);
  if (counts.at_most > counts.below) {
    // Tie: i' = below + 1, i'' = at_most.
    const double ties = static_cast<double>(counts.at_most - counts.below);
    return (static_cast<double>(counts.below) + (ties + 1.0) * tau) /
           denominator;
  }
  return (static_cast<double>(counts.below) + tau) / denominator;
}

absl::Status CheckPercentiles(double low, double high) {
  if (!(low >= 0 && low < high && high <= 100)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "percentiles must satisfy 0 <= low < high <= 100 (got ", low, ", ",
        high, ")"));
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<Cps> Cps::Create(std::span<const double> predictions,
                                std::span<const double> targets,
                                TauMode tau_mode, uint64_t seed) {
  if (predictions.size() != targets.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "CPS has ", predictions.size(), " predictions but ", targets.size(),
        " targets"));
  }
  std::vector<double> residuals(predictions.size());
  for (size_t i = 0; i < predictions.size(); ++i) {
    residuals[i] = targets[i] - predictions[i];
  }
  return FromResiduals(std::move(residuals), tau_mode, seed);
}

absl::StatusOr<Cps> Cps::FromResiduals(std::vector<double> residuals,
                                       TauMode tau_mode, uint64_t seed) {
  if (residuals.empty()) {
    return absl::InvalidArgumentError("CPS needs at least one residual");
  }
  for (size_t i = 0; i < residuals.size(); ++i) {
    if (!std::isfinite(residuals[i])) {
      return absl::InvalidArgumentError(
          absl::StrCat("CPS residual ", i, " is not finite"));
    }
  }
  std::sort(residuals.begin(), residuals.end());
  Cps cps;
  cps.residuals_ = std::move(residuals);
  cps.tau_mode_ = tau_mode;
  cps.seed_ = seed;
  return cps;
}

double Cps::Tau(uint64_t key) const {
  if (tau_mode_ == TauMode::kFixedHalf) return 0.5;
  Rng rng(DeriveSeed(seed_, key));
  return rng.UniformDouble();
}

double Cps::ResidualAt(long index) const {
  if (index <= 0) return -kInf;
  if (index > static_cast<long>(residuals_.size())) return kInf;
  return residuals_[static_cast<size_t>(index - 1)];
}

double Cps::CurveValue(double prediction, long index) const {
  if (index <= 0) return -kInf;
  if (index > static_cast<long>(residuals_.size())) return kInf;
  return prediction + residuals_[static_cast<size_t>(index - 1)];
}

double Cps::CpdValue(double prediction, double y, uint64_t key) const {
  return CpdFromCounts(CountCurve(residuals_, prediction, y), size(), Tau(key));
}

double Cps::CpdValueExcluding(double prediction, double y,
                              double excluded_residual, uint64_t key) const {
  Counts counts = CountCurve(residuals_, prediction, y);
  const double excluded = prediction + excluded_residual;
  if (excluded < y) {
    --counts.below;
    --counts.at_most;
  } else if (excluded == y) {
    --counts.at_most;
  }
  return CpdFromCounts(counts, size() - 1, Tau(key));
}

absl::StatusOr<Interval> Cps::QueryInterval(double prediction,
                                            double low_percentile,
                                            double high_percentile) const {
  if (auto status = CheckPercentiles(low_percentile, high_percentile);
      !status.ok()) {
    return status;
  }
  const double n = static_cast<double>(size() + 1);
  const auto low_index = static_cast<long>(std::floor(low_percentile * n / 100));
  const auto high_index =
      static_cast<long>(std::ceil(high_percentile * n / 100));
  return Interval{CurveValue(prediction, low_index),
                  CurveValue(prediction, high_index)};
}

double Cps::QueryMedian(double prediction) const {
  const double half = static_cast<double>(size() + 1) / 2;
  const auto upper = static_cast<long>(std::ceil(half));
  const auto lower = static_cast<long>(std::floor(half));
  return (CurveValue(prediction, upper) + CurveValue(prediction, lower)) / 2;
}

double Cps::QueryThresholdProbability(double prediction, double threshold,
                                      uint64_t key) const {
  return CpdValue(prediction, threshold, key);
}

double Cps::MedianOffset() const {
  const double half = static_cast<double>(size() + 1) / 2;
  const auto upper = static_cast<long>(std::ceil(half));
  const auto lower = static_cast<long>(std::floor(half));
  return (ResidualAt(upper) + ResidualAt(lower)) / 2;
}

absl::StatusOr<Interval> Cps::IntervalOffsets(double low_percentile,
                                              double high_percentile) const {
  if (auto status = CheckPercentiles(low_percentile, high_percentile);
      !status.ok()) {
    return status;
  }
  const double n = static_cast<double>(size() + 1);
  return Interval{
      ResidualAt(static_cast<long>(std::floor(low_percentile * n / 100))),
      ResidualAt(static_cast<long>(std::ceil(high_percentile * n / 100)))};
}

}  // namespace fastcal
