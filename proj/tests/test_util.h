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

#ifndef FASTCAL_TESTS_TEST_UTIL_H_
#define FASTCAL_TESTS_TEST_UTIL_H_

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "fastcal/dataset.h"
#include "gtest/gtest.h"

#define ASSERT_OK(expr)                           \
  do {                                            \
    const auto& status_ = (expr);                 \
    ASSERT_TRUE(status_.ok()) << status_.status(); \
  } while (0)

namespace fastcal::testing {

template <typename T>
const absl::Status& StatusOf(const absl::StatusOr<T>& v) {
  return v.status();
}

inline Dataset FromCsv(const std::string& text, CsvOptions options = {}) {
  std::istringstream in(text);
  auto d = ReadCsv(in, options);
  EXPECT_TRUE(d.ok()) << d.status();
  return *d;
}

// Numeric features x1..xF given row-major, with an optional class target.
inline Dataset Numeric(size_t num_features, std::vector<double> values,
                       std::vector<double> targets, size_t num_classes = 0) {
  auto schema = std::make_shared<Schema>();
  for (size_t f = 0; f < num_features; ++f) {
    schema->features.push_back({"x" + std::to_string(f + 1),
                                FeatureKind::kNumeric, {}});
  }
  schema->target.name = "y";
  if (num_classes > 0) {
    schema->target.categorical = true;
    for (size_t c = 0; c < num_classes; ++c) {
      schema->target.classes.push_back(std::to_string(c));
    }
  }
  auto d = Dataset::Create(std::move(schema), std::move(values),
                           std::move(targets));
  EXPECT_TRUE(d.ok()) << d.status();
  return *d;
}

}  // namespace fastcal::testing

#endif  // FASTCAL_TESTS_TEST_UTIL_H_
