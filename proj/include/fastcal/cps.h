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

#ifndef FASTCAL_CPS_H_
#define FASTCAL_CPS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"

namespace fastcal {

enum class TauMode {
  // tau = 0.5 for every query.
  kFixedHalf,
  // tau ~ U(0, 1), one draw per query from a stream keyed by (seed, key).
  kSeededUniform,
};

struct Interval {
  double lower = 0;
  double upper = 0;
};

// Conformal predictive system over signed residuals y - h(x).
//
// For a test prediction h, the calibration curve is C_(i) = h + alpha_(i)
// with alpha sorted ascending, C_(0) = -inf and C_(q+1) = +inf. The
// predictive distribution is
//
//   CPD(y) = (i + tau) / (q + 1)                     if C_(i) < y < C_(i+1)
//   CPD(y) = (i' - 1 + (i'' - i' + 2) tau) / (q + 1)  if y = C_(i'..i'')
//
// where i' and i'' are the lowest and highest indices with C = y.
class Cps {
 public:
  static absl::StatusOr<Cps> Create(std::span<const double> predictions,
                                    std::span<const double> targets,
                                    TauMode tau_mode = TauMode::kFixedHalf,
                                    uint64_t seed = 0);
  // From residuals directly (any order).
  static absl::StatusOr<Cps> FromResiduals(std::vector<double> residuals,
                                           TauMode tau_mode = TauMode::kFixedHalf,
                                           uint64_t seed = 0);

  size_t size() const { return residuals_.size(); }
  const std::vector<double>& residuals() const { return residuals_; }
  TauMode tau_mode() const { return tau_mode_; }

  // tau for the query identified by `key` (ignored in kFixedHalf mode).
  double Tau(uint64_t key) const;

  double CpdValue(double prediction, double y, uint64_t key = 0) const;

  // CPD over the residual multiset with one occurrence of
  // `excluded_residual` removed (leave-one-out). Requires that residual to be
  // present. With q = 1 the remaining set is empty and the result is tau.
  double CpdValueExcluding(double prediction, double y,
                           double excluded_residual, uint64_t key = 0) const;

  // [C_(floor(low/100 (q+1))), C_(ceil(high/100 (q+1)))]; index 0 maps to
  // -inf and indices above q to +inf. Requires 0 <= low < high <= 100.
  absl::StatusOr<Interval> QueryInterval(double prediction,
                                         double low_percentile,
                                         double high_percentile) const;

  // (C_(ceil((q+1)/2)) + C_(floor((q+1)/2))) / 2.
  double QueryMedian(double prediction) const;

  // p(y <= t) = CPD(t).
  double QueryThresholdProbability(double prediction, double threshold,
                                   uint64_t key = 0) const;

  // Prediction-independent parts of the median and interval queries:
  // QueryMedian(h) == h + MedianOffset() up to rounding.
  double MedianOffset() const;
  absl::StatusOr<Interval> IntervalOffsets(double low_percentile,
                                           double high_percentile) const;

 private:
  Cps() = default;

  // C_(index) for 0 <= index <= q + 1, using the sentinels at the ends.
  double CurveValue(double prediction, long index) const;
  // alpha_(index) with the same sentinels.
  double ResidualAt(long index) const;

  std::vector<double> residuals_;
  TauMode tau_mode_ = TauMode::kFixedHalf;
  uint64_t seed_ = 0;
};

}  // namespace fastcal

#endif  // FASTCAL_CPS_H_
