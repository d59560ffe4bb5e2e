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

#ifndef CAPCHECK_OCR_HPP_
#define CAPCHECK_OCR_HPP_

#include <array>
#include <functional>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capcheck/io.hpp"
#include "capcheck/score.hpp"
#include "json.hpp"

namespace capcheck {

struct OcrRegion {
  std::string text;
  double confidence = 1.0;
  std::array<double, 4> bbox{};  // x0, y0, x1, y1
};

class OcrEngine {
 public:
  virtual ~OcrEngine() = default;
  virtual std::string id() const = 0;
  // Throws DecodeError for undecodable input, BackendUnavailable when the
  // engine cannot run.
  virtual std::vector<OcrRegion> recognize(std::string_view png_bytes) const = 0;
};

class MockOcrEngine : public OcrEngine {
 public:
  using Fn = std::function<std::vector<std::string>(std::string_view png_bytes)>;
  MockOcrEngine(std::string id, Fn fn) : id_(std::move(id)), fn_(std::move(fn)) {}

  // Same regions for every image.
  static std::unique_ptr<MockOcrEngine> Constant(std::vector<std::string> texts);
  // Keyed by the image's sha-256 hex; unknown images yield nothing.
  static std::unique_ptr<MockOcrEngine> FromTable(const nlohmann::json& table);

  std::string id() const override { return id_; }
  std::vector<OcrRegion> recognize(std::string_view png_bytes) const override;

 private:
  std::string id_;
  Fn fn_;
};

// Offline engine reading the "capcheck:text" chunk that the render sandbox
// embeds in every figure it saves (the text artists matplotlib drew). Images
// without the chunk yield no regions.
class FigureTextEngine : public OcrEngine {
 public:
  std::string id() const override { return "figure-text"; }
  std::vector<OcrRegion> recognize(std::string_view png_bytes) const override;
};

// Runs `command... <image.png>`; the program prints a JSON list of
// {"text", "confidence", "bbox"} objects.
class ExternalOcrEngine : public OcrEngine {
 public:
  ExternalOcrEngine(std::string id, std::vector<std::string> command,
                    double timeout_seconds = 120.0);
  std::string id() const override { return id_; }
  std::vector<OcrRegion> recognize(std::string_view png_bytes) const override;

 private:
  std::string id_;
  std::vector<std::string> command_;
  double timeout_seconds_;
};

// {"type": "figure-text"} | {"type": "external", "id": .., "command": [..]}
// | {"type": "mock", "table": {...}}
std::unique_ptr<OcrEngine> make_ocr_engine(const nlohmann::json& config);

// NFKC, lowercase, trim, collapse whitespace runs to one space.
std::string normalize_text(std::string_view s);

// normalize_text over every string; empties dropped, duplicates merged.
std::set<std::string> normalize(std::span<const std::string> strings);

struct TextSet {
  std::set<std::string> strings;
  std::string engine_id;
  std::size_t raw_count = 0;

  friend bool operator==(const TextSet&, const TextSet&) = default;
};

nlohmann::json to_json(const TextSet& t);
TextSet text_set_from_json(const nlohmann::json& j);

// Regions below `min_confidence` are dropped before normalization;
// raw_count counts every emitted region.
TextSet extract_text(std::string_view png_bytes, const OcrEngine& engine,
                     double min_confidence = 0.0);

struct OcrRecord {
  std::string sample_id;
  TextSet t;      // from the original chart
  TextSet t_hat;  // from the reconstruction; empty when it failed
  std::size_t intersection_size = 0;
};

OcrRecord make_ocr_record(std::string sample_id, TextSet t, TextSet t_hat);

// Micro-averaged over the corpus:
//   P = sum |T ∩ T^| / sum |T^|,  R = sum |T ∩ T^| / sum |T|,  F1 = 2PR/(P+R).
// Throws UndefinedAggregate on an empty corpus.
ScoreTriple ocrscore(std::span<const OcrRecord> records);

// Levenshtein similarity over code points, 1 - d / max(len).
double edit_similarity(std::string_view a, std::string_view b);

// Like ocrscore, but a predicted string may also match a distinct reference
// string whose edit_similarity is >= threshold (one-to-one, greedy).
ScoreTriple ocrscore_fuzzy(std::span<const OcrRecord> records, double threshold);

}  // namespace capcheck

#endif  // CAPCHECK_OCR_HPP_
