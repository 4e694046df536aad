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

#ifndef FASTCAL_SYNTHETIC_H_
#define FASTCAL_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "fastcal/dataset.h"

namespace fastcal {

// Generators for the evaluation suite. Features are named x1, x2, ... and
// drawn i.i.d. standard normal unless stated otherwise.

// Binary labels "0"/"1" with P(y = 1 | x) = sigmoid(strength * (x1 + ... +
// x_informative)).
absl::StatusOr<Dataset> MakeBinary(size_t n, size_t num_features,
                                   size_t informative, uint64_t seed,
                                   double strength = 4);

// Labels "0".."C-1" drawn from softmax(2 * x_{(c mod F) + 1}) over classes c.
absl::StatusOr<Dataset> MakeMulticlass(size_t n, size_t num_features,
                                       size_t num_classes, uint64_t seed);

// y = sum_j coefficients[j] * x_{j+1} + noise_sd * N(0, 1).
struct RegressionTruth {
  std::vector<double> coefficients;
  double noise_sd = 1;

  double Mean(std::span<const double> x) const;
  double ProbabilityAbove(std::span<const double> x, double t) const;
};

absl::StatusOr<Dataset> MakeRegression(size_t n, const RegressionTruth& truth,
                                       uint64_t seed);

// Binary task with two informative numeric features, a noise feature and a
// categorical "color" feature (red/green/blue) that shifts the log-odds.
absl::StatusOr<Dataset> MakeMixedBinary(size_t n, uint64_t seed);

// Names accepted by MakeNamed: binary, binary60, multiclass, regression,
// mixed.
std::vector<std::string> SyntheticNames();
absl::StatusOr<Dataset> MakeNamed(const std::string& name, size_t n,
                                  uint64_t seed);

}  // namespace fastcal

#endif  // FASTCAL_SYNTHETIC_H_
