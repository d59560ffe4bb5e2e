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

#ifndef CAPCHECK_SAMPLE_HPP_
#define CAPCHECK_SAMPLE_HPP_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capcheck/digest.hpp"
#include "capcheck/io.hpp"
#include "json.hpp"

namespace capcheck {

enum class ChartType {
  kLine,
  kBar,
  kPie,
  kHistogram,
  kScatter,
  kArea,
  kBubble,
  kChoroplethMap,
  kTreemap,
};

inline constexpr std::array<ChartType, 9> kAllChartTypes = {
    ChartType::kLine,    ChartType::kBar,     ChartType::kPie,
    ChartType::kHistogram, ChartType::kScatter, ChartType::kArea,
    ChartType::kBubble,  ChartType::kChoroplethMap, ChartType::kTreemap,
};

std::string_view to_string(ChartType t);
// Wire names: line, bar, pie, histogram, scatter, area, bubble,
// choropleth_map, treemap.
std::optional<ChartType> parse_chart_type(std::string_view s);

/// One (chart image, caption) pair under evaluation.
struct ChartSample {
  std::string id;
  std::string image_ref;
  std::string caption;
  std::optional<ChartType> chart_type;
  std::optional<std::string> source_tag;

  friend bool operator==(const ChartSample&, const ChartSample&) = default;
};

nlohmann::json to_json(const ChartSample& s);

struct Manifest {
  std::vector<ChartSample> samples;
  std::string source_path;
  Digest digest;

  const ChartSample* find(std::string_view id) const;
};

struct ManifestOptions {
  // Require every image_ref to resolve to an existing local file.
  bool strict_images = false;
};

/// Parses line-delimited JSON. Blank lines are skipped but still counted, so
/// error messages cite physical line numbers.
Manifest parse_manifest(std::string_view text, std::string source_path = {},
                        const ManifestOptions& opts = {});

Manifest load_manifest(const fs::path& path, const ManifestOptions& opts = {});

/// Line-JSON serialization, one sample per line, in manifest order.
std::string to_jsonl(const Manifest& m);

/// Resolves a sample's image_ref relative to the manifest's directory.
fs::path image_path(const Manifest& m, const ChartSample& s);

}  // namespace capcheck

#endif  // CAPCHECK_SAMPLE_HPP_
