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

#include "capcheck/schema.hpp"

#include <algorithm>
#include <set>

#include "capcheck/error.hpp"

namespace capcheck {
namespace {

template <std::size_t N>
std::vector<std::string> canonical_subset(const nlohmann::json& names,
                                          const std::array<std::string_view, N>& vocab,
                                          std::string_view where) {
  std::set<std::string> given;
  for (const auto& n : names) {
    std::string s = n.get<std::string>();
    if (std::find(vocab.begin(), vocab.end(), s) == vocab.end()) {
      throw ValidationError("schema " + std::string(where) + ": unknown entry '" + s + "'");
    }
    if (!given.insert(s).second) {
      throw ValidationError("schema " + std::string(where) + ": duplicate entry '" + s + "'");
    }
  }
  std::vector<std::string> out;
  for (auto v : vocab) {
    if (given.contains(std::string(v))) out.emplace_back(v);
  }
  return out;
}

// Byte offset -> code point offset in a UTF-8 string.
std::size_t code_point_offset(std::string_view s, std::size_t byte_offset) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < byte_offset && i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) ++n;
  }
  return n;
}

}  // namespace

SchemaTable SchemaTable::FromJson(const nlohmann::json& j) {
  SchemaTable t;
  t.version_ = j.value("version", std::string("unversioned"));
  const auto& structural = j.at("structural");
  const auto& insights = j.at("insights");
  if (structural.size() != kAllChartTypes.size() || insights.size() != kAllChartTypes.size()) {
    throw ValidationError("schema must key exactly the nine chart types");
  }
  for (ChartType type : kAllChartTypes) {
    const std::string name(to_string(type));
    if (!structural.contains(name) || !insights.contains(name)) {
      throw ValidationError("schema is missing chart type '" + name + "'");
    }
    t.table_[type] = RequiredSlots{
        canonical_subset(structural.at(name), kStructuralSlots, name + ".structural"),
        canonical_subset(insights.at(name), kInsightTasks, name + ".insights"),
    };
  }
  return t;
}

SchemaTable SchemaTable::Load(const fs::path& path) {
  try {
    return FromJson(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

const SchemaTable& SchemaTable::Default() {
  static const SchemaTable table = Load(resource_root() / "data" / "schema.json");
  return table;
}

const RequiredSlots& SchemaTable::required_slots(ChartType type) const {
  return table_.at(type);
}

const RequiredSlots& SchemaTable::required_slots(std::string_view type) const {
  auto t = parse_chart_type(type);
  if (!t) throw DomainError("unknown chart type '" + std::string(type) + "'");
  return required_slots(*t);
}

Lexicon Lexicon::FromJson(const nlohmann::json& j) {
  Lexicon lex;
  lex.version_ = j.value("version", std::string("unversioned"));
  for (const auto& [name, patterns] : j.at("cues").items()) {
    auto& compiled = lex.cues_[name];
    for (const auto& p : patterns) {
      try {
        compiled.emplace_back(p.get<std::string>(),
                              std::regex::ECMAScript | std::regex::icase);
      } catch (const std::regex_error& e) {
        throw ValidationError("lexicon cue for '" + name + "' is not a valid regex: " +
                              e.what());
      }
    }
  }
  return lex;
}

Lexicon Lexicon::Load(const fs::path& path) {
  try {
    return FromJson(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

const Lexicon& Lexicon::Default() {
  static const Lexicon lex = Load(resource_root() / "data" / "lexicon.json");
  return lex;
}

const std::vector<std::regex>& Lexicon::cues(std::string_view name) const {
  static const std::vector<std::regex> kNone;
  auto it = cues_.find(name);
  return it == cues_.end() ? kNone : it->second;
}

nlohmann::json to_json(const CoverageReport& r) {
  nlohmann::json matched = nlohmann::json::array();
  for (const auto& m : r.matched) {
    nlohmann::json spans = nlohmann::json::array();
    for (const auto& [b, e] : m.evidence) spans.push_back({b, e});
    matched.push_back({{"name", m.name}, {"evidence", spans}});
  }
  return {
      {"chart_type", std::string(to_string(r.chart_type))},
      {"required", r.required},
      {"matched", matched},
      {"coverage_ratio", r.coverage_ratio},
      {"lexicon_version", r.lexicon_version},
  };
}

CoverageReport coverage(std::string_view caption, ChartType type, const Lexicon& lexicon,
                        const SchemaTable& schema) {
  CoverageReport report;
  report.chart_type = type;
  report.lexicon_version = lexicon.version();
  const RequiredSlots& req = schema.required_slots(type);
  report.required = req.structural;
  report.required.insert(report.required.end(), req.insights.begin(), req.insights.end());

  const std::string text(caption);
  for (const auto& name : report.required) {
    std::set<Span> spans;
    for (const auto& re : lexicon.cues(name)) {
      for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
           it != std::sregex_iterator(); ++it) {
        const auto b = static_cast<std::size_t>(it->position());
        const auto e = b + static_cast<std::size_t>(it->length());
        if (e > b) spans.emplace(code_point_offset(text, b), code_point_offset(text, e));
      }
    }
    if (!spans.empty()) {
      report.matched.push_back({name, std::vector<Span>(spans.begin(), spans.end())});
    }
  }
  report.coverage_ratio =
      report.required.empty()
          ? 0.0
          : static_cast<double>(report.matched.size()) / report.required.size();
  return report;
}

}  // namespace capcheck
