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

#include "fastcal/dataset.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "fastcal/csv.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace fastcal {
namespace {

using testing::FromCsv;

TEST(CsvTest, ParsesNumbers) {
  EXPECT_EQ(ParseNumber("2.5"), 2.5);
  EXPECT_EQ(ParseNumber("-3"), -3.0);
  EXPECT_EQ(ParseNumber("1e3"), 1000.0);
  EXPECT_FALSE(ParseNumber("red").has_value());
  EXPECT_FALSE(ParseNumber("").has_value());
  EXPECT_FALSE(ParseNumber("nan").has_value());
  EXPECT_FALSE(ParseNumber("1.5x").has_value());
}

TEST(CsvTest, FormatNumberRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 3.0}) {
    EXPECT_EQ(ParseNumber(FormatNumber(v)), v);
  }
  EXPECT_EQ(FormatNumber(3.0), "3");
}

TEST(CsvTest, RejectsRaggedRows) {
  std::istringstream in("a,b,y\n1,2,3\n4,5\n");
  auto table = ReadCsvTable(in);
  ASSERT_FALSE(table.ok());
  EXPECT_NE(table.status().message().find("3"), std::string::npos);
}

TEST(DatasetTest, CountsRowsAndFeatures) {
  Dataset d = FromCsv("a,b,c,y\n1,2,3,0\n4,5,6,1\n7,8,9,0\n");
  EXPECT_EQ(d.num_rows(), 3u);
  EXPECT_EQ(d.num_features(), 3u);
}

TEST(DatasetTest, NonNumericColumnIsCategorical) {
  Dataset d = FromCsv("color,x,y\nred,1,0\nblue,2,1\nred,3,0\n");
  const Schema& s = d.schema();
  EXPECT_TRUE(s.features[0].is_categorical());
  EXPECT_EQ(s.features[0].categories,
            (std::vector<std::string>{"red", "blue"}));
  EXPECT_EQ(d.value(0, 0), 0);
  EXPECT_EQ(d.value(1, 0), 1);
  EXPECT_EQ(d.value(2, 0), 0);
  EXPECT_FALSE(s.features[1].is_categorical());
}

TEST(DatasetTest, NumericColumnValues) {
  Dataset d = FromCsv("x,y\n1.0,a\n2.5,b\n3,a\n");
  EXPECT_EQ(d.Column(0), (std::vector<double>{1.0, 2.5, 3.0}));
  EXPECT_TRUE(d.schema().target.categorical);
}

TEST(DatasetTest, KindOverride) {
  CsvOptions options;
  options.kind_overrides["x"] = FeatureKind::kCategorical;
  Dataset d = FromCsv("x,y\n5,1\n7,2\n5,3\n", options);
  EXPECT_TRUE(d.schema().features[0].is_categorical());
  EXPECT_EQ(d.schema().features[0].categories,
            (std::vector<std::string>{"5", "7"}));
}

TEST(DatasetTest, RejectsEmptyAndMissing) {
  std::istringstream empty("");
  EXPECT_FALSE(ReadCsv(empty).ok());
  std::istringstream missing("a,y\n1,2\n,3\n");
  EXPECT_FALSE(ReadCsv(missing).ok());
}

TEST(DatasetTest, WriteThenReadIsIdentical) {
  Dataset d = FromCsv(
      "x,color,y\n0.1,red,1.5\n-2.25,green,0.3333333333333333\n1e-7,red,4\n");
  std::ostringstream out;
  ASSERT_TRUE(WriteCsv(d, out).ok());
  Dataset back = FromCsv(out.str());
  ASSERT_EQ(back.num_rows(), d.num_rows());
  EXPECT_TRUE(std::equal(d.values().begin(), d.values().end(),
                         back.values().begin()));
  EXPECT_TRUE(std::equal(d.targets().begin(), d.targets().end(),
                         back.targets().begin()));
  EXPECT_EQ(back.schema().features[1].categories,
            d.schema().features[1].categories);
}

Dataset Sequential(size_t n) {
  std::ostringstream csv;
  csv << "x,y\n";
  for (size_t i = 0; i < n; ++i) csv << i << "," << i % 2 << "\n";
  return FromCsv(csv.str());
}

TEST(SplitTest, HalfQuarterQuarter) {
  for (uint64_t seed : {0, 1, 42}) {
    auto split = SplitDataset(Sequential(100), 0.5, 0.25, seed);
    ASSERT_OK(split);
    EXPECT_EQ(split->proper_training.num_rows(), 50u);
    EXPECT_EQ(split->calibration.num_rows(), 25u);
    EXPECT_EQ(split->test.num_rows(), 25u);
  }
}

TEST(SplitTest, FloorThenRemainder) {
  auto split = SplitDataset(Sequential(4), 0.5, 0.25, 3);
  ASSERT_OK(split);
  EXPECT_EQ(split->proper_training.num_rows(), 2u);
  EXPECT_EQ(split->calibration.num_rows(), 1u);
  EXPECT_EQ(split->test.num_rows(), 1u);
}

TEST(SplitTest, DisjointCoverAndDeterministic) {
  const Dataset d = Sequential(37);
  auto a = SplitDataset(d, 0.5, 0.25, 9);
  auto b = SplitDataset(d, 0.5, 0.25, 9);
  ASSERT_OK(a);
  ASSERT_OK(b);
  std::multiset<int64_t> ids;
  for (const Dataset* part : {&a->proper_training, &a->calibration, &a->test}) {
    ids.insert(part->row_ids().begin(), part->row_ids().end());
  }
  EXPECT_EQ(ids.size(), 37u);
  EXPECT_EQ(std::set<int64_t>(ids.begin(), ids.end()).size(), 37u);
  const auto same = [](const Dataset& x, const Dataset& y) {
    return std::equal(x.row_ids().begin(), x.row_ids().end(),
                      y.row_ids().begin(), y.row_ids().end());
  };
  EXPECT_TRUE(same(a->proper_training, b->proper_training));
  EXPECT_TRUE(same(a->calibration, b->calibration));
  EXPECT_TRUE(same(a->test, b->test));
}

TEST(SplitTest, RejectsEmptyPartition) {
  EXPECT_FALSE(SplitDataset(Sequential(3), 0.5, 0.25, 1).ok());
  EXPECT_FALSE(SplitDataset(Sequential(10), 0.8, 0.3, 1).ok());
}

}  // namespace
}  // namespace fastcal
