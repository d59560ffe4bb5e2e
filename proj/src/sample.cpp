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

#include "capcheck/sample.hpp"

#include <unordered_map>

#include "capcheck/error.hpp"

namespace capcheck {
namespace {

constexpr std::array<std::string_view, 9> kChartTypeNames = {
    "line", "bar", "pie", "histogram", "scatter",
    "area", "bubble", "choropleth_map", "treemap",
};

std::string at_line(std::size_t line) {
  return "line " + std::to_string(line) + ": ";
}

std::string required_string(const nlohmann::json& obj, const char* field,
                            std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) {
    throw ValidationError(at_line(line) + "missing required field \"" + field +
                          "\"");
  }
  if (!it->is_string()) {
    throw ValidationError(at_line(line) + "field \"" + field +
                          "\" must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

std::string_view to_string(ChartType t) {
  return kChartTypeNames[static_cast<std::size_t>(t)];
}

std::optional<ChartType> parse_chart_type(std::string_view s) {
  for (std::size_t i = 0; i < kChartTypeNames.size(); ++i) {
    if (kChartTypeNames[i] == s) return static_cast<ChartType>(i);
  }
  return std::nullopt;
}

nlohmann::json to_json(const ChartSample& s) {
  nlohmann::json j = {{"id", s.id}, {"image", s.image_ref}, {"caption", s.caption}};
  if (s.chart_type) j["chart_type"] = std::string(to_string(*s.chart_type));
  if (s.source_tag) j["source"] = *s.source_tag;
  return j;
}

const ChartSample* Manifest::find(std::string_view id) const {
  for (const auto& s : samples) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

Manifest parse_manifest(std::string_view text, std::string source_path,
                        const ManifestOptions& opts) {
  Manifest m;
  m.source_path = std::move(source_path);
  m.digest = content_hash(text);
  const fs::path base_dir = fs::path(m.source_path).parent_path();

  std::unordered_map<std::string, std::size_t> first_line;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(at_line(line_no) + "malformed JSON: " + e.what());
    }
    if (!obj.is_object()) {
      throw ParseError(at_line(line_no) + "expected a JSON object");
    }

    ChartSample s;
    s.id = required_string(obj, "id", line_no);
    s.image_ref = required_string(obj, "image", line_no);
    s.caption = required_string(obj, "caption", line_no);
    if (s.id.empty()) {
      throw ValidationError(at_line(line_no) + "field \"id\" must be non-empty");
    }
    if (s.caption.empty()) {
      throw ValidationError(at_line(line_no) +
                            "field \"caption\" must be non-empty");
    }
    if (auto it = obj.find("chart_type"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw ValidationError(at_line(line_no) +
                              "field \"chart_type\" must be a string");
      }
      s.chart_type = parse_chart_type(it->get<std::string>());
      if (!s.chart_type) {
        throw ValidationError(at_line(line_no) + "field \"chart_type\": unknown type \"" +
                              it->get<std::string>() + "\"");
      }
    }
    if (auto it = obj.find("source"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw ValidationError(at_line(line_no) +
                              "field \"source\" must be a string");
      }
      s.source_tag = it->get<std::string>();
    }
    if (opts.strict_images) {
      fs::path p = resolve_local_ref(s.image_ref, base_dir);
      if (!fs::is_regular_file(p)) {
        throw ValidationError(at_line(line_no) + "field \"image\": '" +
                              p.string() + "' does not exist");
      }
    }

    auto [it, inserted] = first_line.emplace(s.id, line_no);
    if (!inserted) {
      throw ValidationError("duplicate id \"" + s.id + "\" on lines " +
                            std::to_string(it->second) + " and " +
                            std::to_string(line_no));
    }
    m.samples.push_back(std::move(s));
  }
  return m;
}

Manifest load_manifest(const fs::path& path, const ManifestOptions& opts) {
  return parse_manifest(read_file(path), path.string(), opts);
}

std::string to_jsonl(const Manifest& m) {
  std::string out;
  for (const auto& s : m.samples) {
    out += to_json(s).dump();
    out.push_back('\n');
  }
  return out;
}

fs::path image_path(const Manifest& m, const ChartSample& s) {
  return resolve_local_ref(s.image_ref, fs::path(m.source_path).parent_path());
}

}  // namespace capcheck
