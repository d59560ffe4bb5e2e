// Copyright 2026 The capcheck Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>

#include "capcheck/error.hpp"
#include "capcheck/schema.hpp"
#include "schema_fixture.hpp"

namespace capcheck {
namespace {

TEST(SchemaTableTest, MatchesTranscribedTables) {
  const auto& schema = SchemaTable::Default();
  ASSERT_EQ(testing::expected_schema_tables().size(), kAllChartTypes.size());
  for (ChartType type : kAllChartTypes) {
    const auto& want = testing::expected_schema_tables().at(std::string(to_string(type)));
    EXPECT_EQ(schema.required_slots(type), want) << to_string(type);
    EXPECT_EQ(schema.required_slots(to_string(type)), want);
  }
}

TEST(SchemaTableTest, UnknownTypeIsDomainError) {
  EXPECT_THROW(SchemaTable::Default().required_slots("radar"), DomainError);
  EXPECT_THROW(SchemaTable::Default().required_slots("Line"), DomainError);
}

TEST(SchemaTableTest, RejectsIncompleteOrForeignTables) {
  nlohmann::json j = nlohmann::json::parse(read_file(resource_root() / "data" / "schema.json"));
  EXPECT_NO_THROW(SchemaTable::FromJson(j));
  auto missing = j;
  missing["structural"].erase("treemap");
  EXPECT_THROW(SchemaTable::FromJson(missing), ValidationError);
  auto foreign = j;
  foreign["insights"]["pie"].push_back("predict_future");
  EXPECT_THROW(SchemaTable::FromJson(foreign), ValidationError);
  auto extra = j;
  extra["structural"]["radar"] = {"title"};
  EXPECT_THROW(SchemaTable::FromJson(extra), ValidationError);
}

std::string slice(std::string_view caption, Span s) {
  return std::string(caption.substr(s.first, s.second - s.first));  // ASCII captions
}

const MatchedSlot* find_match(const CoverageReport& r, std::string_view name) {
  for (const auto& m : r.matched)
    if (m.name == name) return &m;
  return nullptr;
}

TEST(CoverageTest, EmptyCaptionCoversNothing) {
  for (ChartType type : kAllChartTypes) {
    const auto r = coverage("", type);
    EXPECT_EQ(r.coverage_ratio, 0.0);
    EXPECT_TRUE(r.matched.empty());
  }
}

TEST(CoverageTest, MaximumCueCarriesSpan) {
  const std::string caption = "The maximum value is 42";
  const auto r = coverage(caption, ChartType::kLine);
  const MatchedSlot* m = find_match(r, "find_extremum");
  ASSERT_NE(m, nullptr);
  ASSERT_FALSE(m->evidence.empty());
  EXPECT_EQ(slice(caption, m->evidence[0]).rfind("maxim", 0), 0u);
  EXPECT_EQ(m->evidence[0].first, 4u);
  const MatchedSlot* v = find_match(r, "retrieve_value");
  ASSERT_NE(v, nullptr);
  EXPECT_EQ(slice(caption, v->evidence[0]), "42");
}

TEST(CoverageTest, SaturatedLineCaption) {
  const std::string caption =
      "The line chart titled 'Revenue' has an x-axis of years and a y-axis in dollars; "
      "the legend names two series and points are labeled. Revenue starts at 10, peaks at 40, "
      "is higher than costs throughout, ranging between 10 and 40 with an upward trend.";
  const auto r = coverage(caption, ChartType::kLine);
  EXPECT_EQ(r.coverage_ratio, 1.0) << to_json(r).dump();
  EXPECT_EQ(r.required.size(), 9u);
}

TEST(CoverageTest, MatchedIsOrderedSubsetWithEvidence) {
  const std::string caption = "A treemap of nested tiles colour-coded by region, largest is Asia at 40%.";
  const auto r = coverage(caption, ChartType::kTreemap);
  std::size_t pos = 0;
  for (const auto& m : r.matched) {
    auto it = std::find(r.required.begin() + pos, r.required.end(), m.name);
    ASSERT_NE(it, r.required.end()) << m.name;
    pos = static_cast<std::size_t>(it - r.required.begin()) + 1;
    EXPECT_FALSE(m.evidence.empty());
  }
  EXPECT_DOUBLE_EQ(r.coverage_ratio, double(r.matched.size()) / double(r.required.size()));
  EXPECT_EQ(r.lexicon_version, Lexicon::Default().version());
}

TEST(CoverageTest, SpansCountCodePoints) {
  const std::string caption = "Ünïcode: the peak";
  const auto r = coverage(caption, ChartType::kBar);
  const MatchedSlot* m = find_match(r, "find_extremum");
  ASSERT_NE(m, nullptr);
  EXPECT_EQ(m->evidence[0].first, 13u);
}

TEST(CoverageTest, AppendingTextNeverLosesAMatch) {
  const std::vector<std::string> words = {
      "the", "maximum", "range", "title", "axis", "12", "legend", "trend", "most ", "versus",
      "between", "and", "outlier", "map", "tiles", "cluster", "skewed", ".", " ", "key "};
  std::mt19937 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const ChartType type = kAllChartTypes[rng() % kAllChartTypes.size()];
    std::string caption;
    std::set<std::string> before;
    for (int step = 0; step < 12; ++step) {
      const auto r = coverage(caption, type);
      std::set<std::string> now;
      for (const auto& m : r.matched) now.insert(m.name);
      EXPECT_TRUE(std::includes(now.begin(), now.end(), before.begin(), before.end()))
          << "caption: " << caption;
      before = std::move(now);
      caption += (rng() % 2 ? " " : "") + words[rng() % words.size()];
    }
  }
}

}  // namespace
}  // namespace capcheck
