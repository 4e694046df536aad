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

#ifndef FASTCAL_EXPLANATION_H_
#define FASTCAL_EXPLANATION_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "fastcal/calibrator.h"
#include "json.hpp"

namespace fastcal {

enum class ConditionKind { kEquals, kAtMost, kAbove };

// Factual condition covering the explained instance's value:
// "name = category", "name <= threshold" or "name > threshold".
struct FactualRule {
  ConditionKind kind = ConditionKind::kEquals;
  double threshold = 0;  // category code for kEquals
  std::string text;

  bool Covers(double value) const;
};

struct FeatureWeight {
  std::string name;
  double value = 0;        // raw stored value (category code if categorical)
  std::string value_text;  // display form (category label or number)
  bool categorical = false;
  double weight = 0;
  double low = 0;
  double high = 0;
  std::optional<FactualRule> rule;
};

// Calibrated prediction with its interval plus one weight (and weight
// interval) per feature. Weights are phi - phi_f with interval
// [phi - phi_high_f, phi - phi_low_f].
struct Explanation {
  int64_t instance_id = 0;
  ExplanationKind kind = ExplanationKind::kBinary;
  Estimate prediction;
  std::optional<ThresholdSpec> threshold;
  // Classification: the label whose probability is explained.
  std::optional<std::string> positive_class;
  std::vector<FeatureWeight> features;
  // Model objects evaluated at explanation time beyond the instance itself.
  // Model evaluations on perturbed copies of the instance.
  size_t perturbed_calls = 0;

  // Index of the feature with the largest |weight|, lowest index on ties.
  size_t TopFeature() const;
};

nlohmann::ordered_json ToJson(const Explanation& explanation);
absl::StatusOr<Explanation> ExplanationFromJson(const nlohmann::json& json);

// One compact JSON document.
std::string ToJsonLine(const Explanation& explanation);

// Text analogue of an explanation plot. A header line shows the calibrated
// prediction and its interval; each feature (sorted by |weight|) gets a
// signed bar around a centre axis with brackets marking the weight interval.
std::string RenderBars(const Explanation& explanation, size_t half_width = 20);

}  // namespace fastcal

#endif  // FASTCAL_EXPLANATION_H_
