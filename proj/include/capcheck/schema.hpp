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

#ifndef CAPCHECK_SCHEMA_HPP_
#define CAPCHECK_SCHEMA_HPP_

#include <map>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "capcheck/sample.hpp"

namespace capcheck {

// Type-specific caption schema: which structural elements and key-insight
// tasks a caption of each chart type should cover. Coverage is advisory and
// never feeds into scoring.

// Structural slots, in canonical order.
inline constexpr std::array<std::string_view, 14> kStructuralSlots = {
    "title",    "axes",        "categories",        "bubble",
    "legends",  "labels",      "base_map",          "color_scale",
    "geographic_labels", "data_classes", "north_arrow", "tiles",
    "hierarchy_levels",  "color_coding",
};

// Key-insight tasks, in canonical order.
inline constexpr std::array<std::string_view, 8> kInsightTasks = {
    "retrieve_value",          "find_extremum",
    "make_comparison",         "determine_range",
    "find_correlations_trend", "characterize_distribution",
    "find_clusters",           "find_anomalies",
};

struct RequiredSlots {
  std::vector<std::string> structural;
  std::vector<std::string> insights;

  friend bool operator==(const RequiredSlots&, const RequiredSlots&) = default;
};

class SchemaTable {
 public:
  // Throws ValidationError unless exactly the nine chart types are keyed and
  // every entry comes from the fixed vocabularies.
  static SchemaTable FromJson(const nlohmann::json& j);
  static SchemaTable Load(const fs::path& path);
  // data/schema.json under resource_root().
  static const SchemaTable& Default();

  // Entries come back in canonical vocabulary order.
  const RequiredSlots& required_slots(ChartType type) const;
  // Throws DomainError for names outside the nine chart types.
  const RequiredSlots& required_slots(std::string_view type) const;

  const std::string& version() const { return version_; }

 private:
  std::string version_;
  std::map<ChartType, RequiredSlots> table_;
};

class Lexicon {
 public:
  static Lexicon FromJson(const nlohmann::json& j);
  static Lexicon Load(const fs::path& path);
  static const Lexicon& Default();

  const std::string& version() const { return version_; }
  // Compiled cue patterns for a slot or task; empty if none are defined.
  const std::vector<std::regex>& cues(std::string_view name) const;

 private:
  std::string version_;
  std::map<std::string, std::vector<std::regex>, std::less<>> cues_;
};

// Half-open range of code-point offsets into the caption.
using Span = std::pair<std::size_t, std::size_t>;

struct MatchedSlot {
  std::string name;
  std::vector<Span> evidence;  // at least one span
};

struct CoverageReport {
  ChartType chart_type;
  std::vector<std::string> required;  // structural slots, then insight tasks
  std::vector<MatchedSlot> matched;   // subset of required, same order
  double coverage_ratio = 0;
  std::string lexicon_version;
};

nlohmann::json to_json(const CoverageReport& r);

CoverageReport coverage(std::string_view caption, ChartType type,
                        const Lexicon& lexicon = Lexicon::Default(),
                        const SchemaTable& schema = SchemaTable::Default());

}  // namespace capcheck

#endif  // CAPCHECK_SCHEMA_HPP_
