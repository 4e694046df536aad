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

#include "fastcal/explanation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "fastcal/csv.h"

namespace fastcal {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Non-finite numbers become null.
ordered_json Number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

double NumberOr(const json& j, double missing) {
  return j.is_null() ? missing : j.get<double>();
}

std::string FormatSigned(double v) {
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  return absl::StrFormat("%+.3f", v);
}

std::string FormatPlain(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return absl::StrFormat("%.3f", v);
}

absl::StatusOr<ExplanationKind> ParseKind(const std::string& name) {
  for (auto kind : {ExplanationKind::kBinary, ExplanationKind::kMulticlass,
                    ExplanationKind::kRegression,
                    ExplanationKind::kThresholded}) {
    if (ExplanationKindName(kind) == name) return kind;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown task '", name, "'"));
}

}  // namespace

bool FactualRule::Covers(double value) const {
  switch (kind) {
    case ConditionKind::kEquals:
      return value == threshold;
    case ConditionKind::kAtMost:
      return value <= threshold;
    case ConditionKind::kAbove:
      return value > threshold;
  }
  return false;
}

size_t Explanation::TopFeature() const {
  size_t best = 0;
  for (size_t f = 1; f < features.size(); ++f) {
    if (std::abs(features[f].weight) > std::abs(features[best].weight)) {
      best = f;
    }
  }
  return best;
}

ordered_json ToJson(const Explanation& e) {
  ordered_json out;
  out["instance_id"] = e.instance_id;
  out["task"] = ExplanationKindName(e.kind);
  out["prediction"] = {{"value", Number(e.prediction.value)},
                       {"low", Number(e.prediction.low)},
                       {"high", Number(e.prediction.high)}};
  if (e.threshold) {
    out["threshold"] = {{"t", e.threshold->t},
                        {"direction", DirectionName(e.threshold->direction)}};
  }
  if (e.positive_class) out["class"] = *e.positive_class;
  ordered_json features = ordered_json::array();
  for (const auto& f : e.features) {
    ordered_json item;
    item["name"] = f.name;
    if (f.categorical) {
      item["value"] = f.value_text;
    } else {
      item["value"] = Number(f.value);
    }
    item["weight"] = Number(f.weight);
    item["low"] = Number(f.low);
    item["high"] = Number(f.high);
    if (f.rule) item["condition"] = f.rule->text;
    features.push_back(std::move(item));
  }
  out["features"] = std::move(features);
  return out;
}

std::string ToJsonLine(const Explanation& explanation) {
  return ToJson(explanation).dump();
}

absl::StatusOr<Explanation> ExplanationFromJson(const json& j) {
  try {
    Explanation e;
    e.instance_id = j.at("instance_id").get<int64_t>();
    auto kind = ParseKind(j.at("task").get<std::string>());
    if (!kind.ok()) return kind.status();
    e.kind = *kind;
    const auto& p = j.at("prediction");
    e.prediction = {NumberOr(p.at("value"), std::nan("")),
                    NumberOr(p.at("low"), -kInf),
                    NumberOr(p.at("high"), kInf)};
    if (j.contains("threshold")) {
      const auto& t = j.at("threshold");
      auto direction = ParseDirection(t.at("direction").get<std::string>());
      if (!direction.ok()) return direction.status();
      e.threshold = ThresholdSpec{t.at("t").get<double>(), *direction};
    }
    if (j.contains("class")) e.positive_class = j.at("class").get<std::string>();
    for (const auto& item : j.at("features")) {
      FeatureWeight f;
      f.name = item.at("name").get<std::string>();
      const auto& value = item.at("value");
      if (value.is_string()) {
        f.categorical = true;
        f.value_text = value.get<std::string>();
      } else {
        f.value = NumberOr(value, std::nan(""));
        f.value_text = FormatNumber(f.value);
      }
      f.weight = NumberOr(item.at("weight"), std::nan(""));
      f.low = NumberOr(item.at("low"), -kInf);
      f.high = NumberOr(item.at("high"), kInf);
      e.features.push_back(std::move(f));
    }
    return e;
  } catch (const json::exception& ex) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed explanation JSON: ", ex.what()));
  }
}

std::string RenderBars(const Explanation& e, size_t half_width) {
  std::string out;
  std::string label = "prediction";
  if (e.kind == ExplanationKind::kThresholded && e.threshold) {
    label = absl::StrCat(
        "P(y ",
        e.threshold->direction == ThresholdDirection::kAbove ? ">" : "<=",
        " ", FormatNumber(e.threshold->t), ")");
  } else if (e.positive_class) {
    label = absl::StrCat("P(", *e.positive_class, ")");
  }
  absl::StrAppend(&out, "instance ", e.instance_id, "  ", label, " = ",
                  FormatPlain(e.prediction.value), "  [",
                  FormatPlain(e.prediction.low), ", ",
                  FormatPlain(e.prediction.high), "]\n");

  std::vector<size_t> order(e.features.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::abs(e.features[a].weight) > std::abs(e.features[b].weight);
  });
  double scale = 0;
  size_t name_width = 4;
  for (const auto& f : e.features) {
    for (double v : {f.weight, f.low, f.high}) {
      if (std::isfinite(v)) scale = std::max(scale, std::abs(v));
    }
    name_width = std::max(name_width, f.name.size());
  }
  if (scale == 0) scale = 1;

  const auto column = [&](double v) -> long {
    const double clipped = std::clamp(v / scale, -1.0, 1.0);
    return static_cast<long>(half_width) +
           std::lround(clipped * static_cast<double>(half_width));
  };
  const long centre = static_cast<long>(half_width);
  for (size_t f : order) {
    const auto& feature = e.features[f];
    std::string bar(2 * half_width + 1, ' ');
    const long end = column(feature.weight);
    for (long c = std::min(centre, end); c <= std::max(centre, end); ++c) {
      bar[static_cast<size_t>(c)] = feature.weight >= 0 ? '+' : '-';
    }
    bar[static_cast<size_t>(centre)] = '|';
    bar[static_cast<size_t>(column(feature.low))] = '[';
    bar[static_cast<size_t>(column(feature.high))] = ']';
    std::string name = feature.name;
    name.resize(name_width, ' ');
    const std::string condition =
        feature.rule ? feature.rule->text
                     : absl::StrCat(feature.name, " = ", feature.value_text);
    absl::StrAppend(&out, name, " ", bar, " ", FormatSigned(feature.weight),
                    " [", FormatSigned(feature.low), ", ",
                    FormatSigned(feature.high), "]  ", condition, "\n");
  }
  return out;
}

}  // namespace fastcal
