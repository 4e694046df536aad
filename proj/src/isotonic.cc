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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace fastcal {

void PoolAdjacentViolatorsFromSums(std::span<const double> weighted_sums,
                                   std::span<const double> weight,
                                   std::span<double> fitted) {
  struct Block {
    double sum;  // weighted sum of y
    double weight;
    size_t end;  // one past the last member
  };
  thread_local std::vector<Block> blocks;
  blocks.clear();
  for (size_t i = 0; i < weighted_sums.size(); ++i) {
    blocks.push_back({weighted_sums[i], weight[i], i + 1});
    // Merge while the previous block's mean exceeds the last one's.
    while (blocks.size() > 1) {
      const Block& last = blocks.back();
      const Block& prev = blocks[blocks.size() - 2];
      if (prev.sum * last.weight <= last.sum * prev.weight) break;
      const Block merged{prev.sum + last.sum, prev.weight + last.weight,
                         last.end};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  size_t begin = 0;
  for (const Block& block : blocks) {
    const double mean = block.sum / block.weight;
    std::fill(fitted.begin() + begin, fitted.begin() + block.end, mean);
    begin = block.end;
  }
}

void PoolAdjacentViolators(std::span<const double> y,
                           std::span<const double> weight,
                           std::span<double> fitted) {
  std::vector<double> sums(y.size());
  for (size_t i = 0; i < y.size(); ++i) sums[i] = y[i] * weight[i];
  PoolAdjacentViolatorsFromSums(sums, weight, fitted);
}

absl::StatusOr<IsotonicFit> FitPava(std::span<const IsotonicPoint> points) {
  if (points.empty()) {
    return absl::InvalidArgumentError("isotonic fit needs at least one point");
  }
  for (size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!(p.weight > 0) || !std::isfinite(p.weight)) {
      return absl::InvalidArgumentError(
          absl::StrCat("point ", i, " has non-positive weight ", p.weight));
    }
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      return absl::InvalidArgumentError(
          absl::StrCat("point ", i, " is not finite"));
    }
  }
  std::vector<size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return points[a].x < points[b].x;
  });

  std::vector<double> xs, sums, weights;
  for (size_t i : order) {
    const auto& p = points[i];
    if (!xs.empty() && xs.back() == p.x) {
      sums.back() += p.y * p.weight;
      weights.back() += p.weight;
    } else {
      xs.push_back(p.x);
      sums.push_back(p.y * p.weight);
      weights.push_back(p.weight);
    }
  }
  std::vector<double> fitted(xs.size());
  PoolAdjacentViolatorsFromSums(sums, weights, fitted);
  return IsotonicFit(std::move(xs), std::move(fitted));
}

double IsotonicFit::Evaluate(double x) const {
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  if (it == breakpoints_.begin()) return fitted_.front();
  return fitted_[static_cast<size_t>(it - breakpoints_.begin()) - 1];
}

}  // namespace fastcal
