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

#ifndef FASTCAL_ISOTONIC_H_
#define FASTCAL_ISOTONIC_H_

#include <span>
#include <vector>

#include "absl/status/statusor.h"

namespace fastcal {

struct IsotonicPoint {
  double x = 0;
  double y = 0;
  double weight = 1;
};

// Non-decreasing step function produced by FitPava.
class IsotonicFit {
 public:
  IsotonicFit(std::vector<double> breakpoints, std::vector<double> fitted)
      : breakpoints_(std::move(breakpoints)), fitted_(std::move(fitted)) {}

  // Distinct x values of the fitted points, ascending.
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  // Fitted value at each breakpoint. Non-decreasing.
  const std::vector<double>& fitted() const { return fitted_; }

  // Value of the largest breakpoint <= x; the first fitted value when x lies
  // below every breakpoint.
  double Evaluate(double x) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> fitted_;
};

// Weighted least-squares isotonic regression. Points are sorted by x and
// points sharing an x are merged (weights summed, y weight-averaged) before
// pool-adjacent-violators runs.
absl::StatusOr<IsotonicFit> FitPava(std::span<const IsotonicPoint> points);

// Pool-adjacent-violators on values already ordered by x. Writes one fitted
// value per input into `fitted`. Weights must be positive. O(n).
void PoolAdjacentViolators(std::span<const double> y,
                           std::span<const double> weight,
                           std::span<double> fitted);

// Same, with the input given as per-point weighted sums (y * weight). Callers
// holding exact sums (label counts) avoid the rounding of y * weight.
void PoolAdjacentViolatorsFromSums(std::span<const double> weighted_sums,
                                   std::span<const double> weight,
                                   std::span<double> fitted);

}  // namespace fastcal

#endif  // FASTCAL_ISOTONIC_H_
