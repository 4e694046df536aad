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

#ifndef FASTCAL_PERTURB_H_
#define FASTCAL_PERTURB_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "fastcal/dataset.h"

namespace fastcal {

enum class NoiseType { kUniform, kGaussian };

enum class PerturbMode {
  // Numeric features are permuted across all k*q entries, then noised.
  // Categorical features are permuted.
  kPermuteThenNoise,
  // Numeric features are noised in place (no permutation). Categorical
  // features are permuted.
  kNoiseOnly,
};

std::string NoiseTypeName(NoiseType type);
absl::StatusOr<NoiseType> ParseNoiseType(const std::string& name);
std::string PerturbModeName(PerturbMode mode);
absl::StatusOr<PerturbMode> ParsePerturbMode(const std::string& name);

struct PerturbConfig {
  NoiseType noise_type = NoiseType::kUniform;
  size_t scale_factor = 5;
  double severity = 0.5;
  uint64_t seed = 42;
  PerturbMode mode = PerturbMode::kPermuteThenNoise;
};

absl::Status ValidatePerturbConfig(const PerturbConfig& config);

// k stacked copies of the calibration set, copy-major.
Dataset Multiply(const Dataset& calibration, size_t k);

// One Fisher-Yates pass over all entries with Rng(seed).
std::vector<double> PermuteColumn(std::span<const double> values,
                                  uint64_t seed);

// values[i] + severity * sigma * N(0, 1), one draw per entry from Rng(seed).
std::vector<double> GaussianNoise(std::span<const double> values,
                                  double severity, double sigma, uint64_t seed);

// values[i] + U(-severity * range, severity * range), one draw per entry
// from Rng(seed).
std::vector<double> UniformNoise(std::span<const double> values,
                                 double severity, double range, uint64_t seed);

// Population standard deviation and max - min of a column.
double PopulationStdDev(std::span<const double> values);
double ValueRange(std::span<const double> values);

// The multiplied calibration set plus, for every feature f, the perturbed
// column that replaces the k copies of f. Statistics are taken from the
// original (unmultiplied) calibration column.
struct PerturbedCalibration {
  Dataset multiplied;
  std::vector<std::vector<double>> columns;
  std::vector<double> sigma;
  std::vector<double> range;
  size_t scale_factor = 1;

  size_t num_features() const { return columns.size(); }
  // Multiplied row j is a copy of calibration row j % q.
  std::vector<size_t> BaseRows() const;
};

// Per-feature seeds are DeriveSeed(config.seed, f) for the permutation and
// DeriveSeed(DeriveSeed(config.seed, f), 1) for the noise.
absl::StatusOr<PerturbedCalibration> PerturbCalibration(
    const Dataset& calibration, const PerturbConfig& config);

// The perturbed column of one feature; PerturbCalibration calls this for
// every feature.
std::vector<double> PerturbFeature(const Dataset& multiplied, size_t feature,
                                   double sigma, double range,
                                   const PerturbConfig& config);

}  // namespace fastcal

#endif  // FASTCAL_PERTURB_H_
