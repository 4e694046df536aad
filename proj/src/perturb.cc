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

#include "fastcal/perturb.h"

#include <algorithm>
#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fastcal/rng.h"

namespace fastcal {

std::string NoiseTypeName(NoiseType type) {
  return type == NoiseType::kUniform ? "uniform" : "gaussian";
}

absl::StatusOr<NoiseType> ParseNoiseType(const std::string& name) {
  if (name == "uniform") return NoiseType::kUniform;
  if (name == "gaussian") return NoiseType::kGaussian;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown noise type '", name, "' (uniform|gaussian)"));
}

std::string PerturbModeName(PerturbMode mode) {
  return mode == PerturbMode::kPermuteThenNoise ? "permute-noise" : "noise-only";
}

absl::StatusOr<PerturbMode> ParsePerturbMode(const std::string& name) {
  if (name == "permute-noise") return PerturbMode::kPermuteThenNoise;
  if (name == "noise-only") return PerturbMode::kNoiseOnly;
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown perturbation mode '", name, "' (permute-noise|noise-only)"));
}

absl::Status ValidatePerturbConfig(const PerturbConfig& config) {
  if (config.scale_factor < 1) {
    return absl::InvalidArgumentError("scale factor must be at least 1");
  }
  if (!(config.severity >= 0) || !std::isfinite(config.severity)) {
    return absl::InvalidArgumentError(
        absl::StrCat("severity must be a non-negative number (got ",
                     config.severity, ")"));
  }
  return absl::OkStatus();
}

Dataset Multiply(const Dataset& calibration, size_t k) {
  std::vector<size_t> rows;
  rows.reserve(calibration.num_rows() * k);
  for (size_t copy = 0; copy < k; ++copy) {
    for (size_t i = 0; i < calibration.num_rows(); ++i) rows.push_back(i);
  }
  return calibration.Subset(rows);
}

std::vector<double> PermuteColumn(std::span<const double> values,
                                  uint64_t seed) {
  std::vector<double> out(values.begin(), values.end());
  Rng rng(seed);
  rng.Shuffle(std::span<double>(out));
  return out;
}

std::vector<double> GaussianNoise(std::span<const double> values,
                                  double severity, double sigma,
                                  uint64_t seed) {
  std::vector<double> out(values.begin(), values.end());
  const double scale = severity * sigma;
  if (scale == 0) return out;
  Rng rng(seed);
  for (double& v : out) v += scale * rng.StandardNormal();
  return out;
}

std::vector<double> UniformNoise(std::span<const double> values,
                                 double severity, double range,
                                 uint64_t seed) {
  std::vector<double> out(values.begin(), values.end());
  const double half_width = severity * range;
  if (half_width == 0) return out;
  Rng rng(seed);
  for (double& v : out) v += half_width * (2.0 * rng.UniformDouble() - 1.0);
  return out;
}

double PopulationStdDev(std::span<const double> values) {
  if (values.empty()) return 0;
  double sum = 0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

double ValueRange(std::span<const double> values) {
  if (values.empty()) return 0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

std::vector<size_t> PerturbedCalibration::BaseRows() const {
  const size_t q = multiplied.num_rows() / scale_factor;
  std::vector<size_t> rows(multiplied.num_rows());
  for (size_t j = 0; j < rows.size(); ++j) rows[j] = j % q;
  return rows;
}

std::vector<double> PerturbFeature(const Dataset& multiplied, size_t feature,
                                   double sigma, double range,
                                   const PerturbConfig& config) {
  const uint64_t feature_seed = DeriveSeed(config.seed, feature);
  const std::vector<double> original = multiplied.Column(feature);
  const bool categorical =
      multiplied.schema().features[feature].is_categorical();
  if (categorical) return PermuteColumn(original, feature_seed);

  std::vector<double> column =
      config.mode == PerturbMode::kPermuteThenNoise
          ? PermuteColumn(original, feature_seed)
          : original;
  const uint64_t noise_seed = DeriveSeed(feature_seed, 1);
  switch (config.noise_type) {
    case NoiseType::kGaussian:
      return GaussianNoise(column, config.severity, sigma, noise_seed);
    case NoiseType::kUniform:
      return UniformNoise(column, config.severity, range, noise_seed);
  }
  return column;
}

absl::StatusOr<PerturbedCalibration> PerturbCalibration(
    const Dataset& calibration, const PerturbConfig& config) {
  if (auto status = ValidatePerturbConfig(config); !status.ok()) return status;
  if (calibration.empty()) {
    return absl::InvalidArgumentError("calibration set is empty");
  }
  PerturbedCalibration result;
  result.scale_factor = config.scale_factor;
  result.multiplied = Multiply(calibration, config.scale_factor);
  const size_t num_features = calibration.num_features();
  result.columns.resize(num_features);
  result.sigma.assign(num_features, 0.0);
  result.range.assign(num_features, 0.0);
  for (size_t f = 0; f < num_features; ++f) {
    if (!calibration.schema().features[f].is_categorical()) {
      const std::vector<double> column = calibration.Column(f);
      result.sigma[f] = PopulationStdDev(column);
      result.range[f] = ValueRange(column);
    }
    result.columns[f] = PerturbFeature(result.multiplied, f, result.sigma[f],
                                       result.range[f], config);
  }
  return result;
}

}  // namespace fastcal
