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

#include "fastcal/synthetic.h"

#include <cmath>
#include <memory>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "fastcal/rng.h"

namespace fastcal {
namespace {

double Sigmoid(double z) { return 1 / (1 + std::exp(-z)); }

std::shared_ptr<Schema> NumericSchema(size_t num_features) {
  auto schema = std::make_shared<Schema>();
  for (size_t f = 0; f < num_features; ++f) {
    schema->features.push_back(
        {absl::StrCat("x", f + 1), FeatureKind::kNumeric, {}});
  }
  schema->target.name = "y";
  return schema;
}

void SetClasses(Schema* schema, size_t num_classes) {
  schema->target.categorical = true;
  for (size_t c = 0; c < num_classes; ++c) {
    schema->target.classes.push_back(absl::StrCat(c));
  }
}

std::vector<double> NormalMatrix(size_t n, size_t num_features, Rng& rng) {
  std::vector<double> values(n * num_features);
  for (double& v : values) v = rng.StandardNormal();
  return values;
}

}  // namespace

absl::StatusOr<Dataset> MakeBinary(size_t n, size_t num_features,
                                   size_t informative, uint64_t seed,
                                   double strength) {
  if (num_features == 0 || informative > num_features) {
    return absl::InvalidArgumentError(
        "binary generator needs 1 <= features and informative <= features");
  }
  auto schema = NumericSchema(num_features);
  SetClasses(schema.get(), 2);
  Rng rng(seed);
  std::vector<double> values = NormalMatrix(n, num_features, rng);
  std::vector<double> targets(n);
  for (size_t i = 0; i < n; ++i) {
    double z = 0;
    for (size_t f = 0; f < informative; ++f) z += values[i * num_features + f];
    targets[i] = rng.UniformDouble() < Sigmoid(strength * z) ? 1 : 0;
  }
  return Dataset::Create(std::move(schema), std::move(values),
                         std::move(targets));
}

absl::StatusOr<Dataset> MakeMulticlass(size_t n, size_t num_features,
                                       size_t num_classes, uint64_t seed) {
  if (num_features == 0 || num_classes < 3) {
    return absl::InvalidArgumentError(
        "multiclass generator needs features and at least 3 classes");
  }
  auto schema = NumericSchema(num_features);
  SetClasses(schema.get(), num_classes);
  Rng rng(seed);
  std::vector<double> values = NormalMatrix(n, num_features, rng);
  std::vector<double> targets(n);
  std::vector<double> weights(num_classes);
  for (size_t i = 0; i < n; ++i) {
    double total = 0;
    for (size_t c = 0; c < num_classes; ++c) {
      weights[c] = std::exp(2 * values[i * num_features + c % num_features]);
      total += weights[c];
    }
    double u = rng.UniformDouble() * total;
    size_t label = num_classes - 1;
    for (size_t c = 0; c < num_classes; ++c) {
      if (u < weights[c]) {
        label = c;
        break;
      }
      u -= weights[c];
    }
    targets[i] = static_cast<double>(label);
  }
  return Dataset::Create(std::move(schema), std::move(values),
                         std::move(targets));
}

double RegressionTruth::Mean(std::span<const double> x) const {
  double mean = 0;
  for (size_t j = 0; j < coefficients.size(); ++j) {
    mean += coefficients[j] * x[j];
  }
  return mean;
}

double RegressionTruth::ProbabilityAbove(std::span<const double> x,
                                         double t) const {
  if (noise_sd == 0) return Mean(x) > t ? 1 : 0;
  return 0.5 * std::erfc((t - Mean(x)) / (noise_sd * std::sqrt(2.0)));
}

absl::StatusOr<Dataset> MakeRegression(size_t n, const RegressionTruth& truth,
                                       uint64_t seed) {
  if (truth.coefficients.empty() || !(truth.noise_sd >= 0)) {
    return absl::InvalidArgumentError(
        "regression generator needs coefficients and noise_sd >= 0");
  }
  const size_t num_features = truth.coefficients.size();
  auto schema = NumericSchema(num_features);
  Rng rng(seed);
  std::vector<double> values = NormalMatrix(n, num_features, rng);
  std::vector<double> targets(n);
  for (size_t i = 0; i < n; ++i) {
    targets[i] =
        truth.Mean(std::span<const double>(values).subspan(i * num_features,
                                                           num_features)) +
        truth.noise_sd * rng.StandardNormal();
  }
  return Dataset::Create(std::move(schema), std::move(values),
                         std::move(targets));
}

absl::StatusOr<Dataset> MakeMixedBinary(size_t n, uint64_t seed) {
  static const char* const kColors[] = {"red", "green", "blue"};
  static const double kShift[] = {1.5, 0.0, -1.5};
  auto schema = NumericSchema(3);
  schema->features.push_back({"color", FeatureKind::kCategorical, {}});
  SetClasses(schema.get(), 2);
  Rng rng(seed);
  std::vector<double> values(n * 4);
  std::vector<double> targets(n);
  // Category codes follow first appearance, as they would after a reload.
  int code_of[3] = {-1, -1, -1};
  for (size_t i = 0; i < n; ++i) {
    double* row = &values[i * 4];
    for (size_t f = 0; f < 3; ++f) row[f] = rng.StandardNormal();
    const auto color = static_cast<size_t>(rng.UniformIndex(3));
    if (code_of[color] < 0) {
      code_of[color] = static_cast<int>(schema->features[3].categories.size());
      schema->features[3].categories.push_back(kColors[color]);
    }
    row[3] = code_of[color];
    const double z = 2 * row[0] - 1.5 * row[1] + kShift[color];
    targets[i] = rng.UniformDouble() < Sigmoid(z) ? 1 : 0;
  }
  return Dataset::Create(std::move(schema), std::move(values),
                         std::move(targets));
}

std::vector<std::string> SyntheticNames() {
  return {"binary", "binary60", "multiclass", "regression", "mixed"};
}

absl::StatusOr<Dataset> MakeNamed(const std::string& name, size_t n,
                                  uint64_t seed) {
  if (name == "binary") return MakeBinary(n, 10, 1, seed);
  if (name == "binary60") return MakeBinary(n, 60, 3, seed);
  if (name == "multiclass") return MakeMulticlass(n, 5, 3, seed);
  if (name == "regression") {
    return MakeRegression(n, RegressionTruth{{3, -2, 1, 0.5, 0}, 1}, seed);
  }
  if (name == "mixed") return MakeMixedBinary(n, seed);
  return absl::InvalidArgumentError(absl::StrCat(
      "unknown synthetic dataset '", name,
      "' (binary, binary60, multiclass, regression, mixed)"));
}

}  // namespace fastcal
