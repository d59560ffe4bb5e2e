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

#include "capcheck/ocr.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>

#include "capcheck/digest.hpp"
#include "capcheck/error.hpp"
#include "capcheck/image.hpp"
#include "capcheck/process.hpp"

namespace capcheck {
namespace {

const icu::Normalizer2& nfkc() {
  static const icu::Normalizer2* n = [] {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* p = icu::Normalizer2::getNFKCInstance(status);
    if (U_FAILURE(status) || !p) throw Error("ICU NFKC normalizer unavailable");
    return p;
  }();
  return *n;
}

std::vector<OcrRegion> regions_from_strings(std::vector<std::string> texts) {
  std::vector<OcrRegion> out;
  out.reserve(texts.size());
  for (auto& t : texts) out.push_back(OcrRegion{std::move(t)});
  return out;
}

std::u32string to_code_points(std::string_view s) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  std::u32string out;
  for (int32_t i = 0; i < u.length();) {
    UChar32 c = u.char32At(i);
    out.push_back(static_cast<char32_t>(c));
    i += U16_LENGTH(c);
  }
  return out;
}

std::size_t levenshtein(const std::u32string& a, const std::u32string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Exact matches plus greedy one-to-one fuzzy matches of the leftovers.
std::size_t fuzzy_matches(const std::set<std::string>& t,
                          const std::set<std::string>& t_hat, double threshold) {
  std::size_t matched = 0;
  std::vector<std::string> ref_left;
  std::vector<std::string> pred_left;
  for (const auto& s : t_hat) {
    if (t.contains(s)) {
      ++matched;
    } else {
      pred_left.push_back(s);
    }
  }
  for (const auto& s : t) {
    if (!t_hat.contains(s)) ref_left.push_back(s);
  }
  std::vector<bool> used(ref_left.size(), false);
  for (const auto& p : pred_left) {
    double best = -1;
    std::size_t best_j = ref_left.size();
    for (std::size_t j = 0; j < ref_left.size(); ++j) {
      if (used[j]) continue;
      const double sim = edit_similarity(p, ref_left[j]);
      if (sim >= threshold && sim > best) {
        best = sim;
        best_j = j;
      }
    }
    if (best_j < ref_left.size()) {
      used[best_j] = true;
      ++matched;
    }
  }
  return matched;
}

}  // namespace

std::unique_ptr<MockOcrEngine> MockOcrEngine::Constant(std::vector<std::string> texts) {
  return std::make_unique<MockOcrEngine>(
      "mock:constant", [texts = std::move(texts)](std::string_view) { return texts; });
}

std::unique_ptr<MockOcrEngine> MockOcrEngine::FromTable(const nlohmann::json& table) {
  auto map = table.get<std::map<std::string, std::vector<std::string>>>();
  const std::string id = "mock:" + content_hash(table.dump()).hex().substr(0, 12);
  return std::make_unique<MockOcrEngine>(id, [map = std::move(map)](std::string_view png) {
    auto it = map.find(content_hash(png).hex());
    return it == map.end() ? std::vector<std::string>{} : it->second;
  });
}

std::vector<OcrRegion> MockOcrEngine::recognize(std::string_view png_bytes) const {
  return regions_from_strings(fn_(png_bytes));
}

std::vector<OcrRegion> FigureTextEngine::recognize(std::string_view png_bytes) const {
  const auto chunks = png_text_chunks(png_bytes);
  auto it = chunks.find("capcheck:text");
  if (it == chunks.end()) return {};
  try {
    return regions_from_strings(
        nlohmann::json::parse(it->second).get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("malformed capcheck:text chunk: ") + e.what());
  }
}

ExternalOcrEngine::ExternalOcrEngine(std::string id, std::vector<std::string> command,
                                     double timeout_seconds)
    : id_(std::move(id)), command_(std::move(command)), timeout_seconds_(timeout_seconds) {
  if (command_.empty()) throw ConfigError("external OCR engine: empty command");
}

std::vector<OcrRegion> ExternalOcrEngine::recognize(std::string_view png_bytes) const {
  decode_png(png_bytes);  // surface undecodable input as DecodeError
  TempDir tmp;
  const fs::path img = tmp.path() / "image.png";
  write_file_atomic(img, png_bytes);
  std::vector<std::string> argv = command_;
  argv.push_back(img.string());
  const std::string out = run_and_capture(argv, timeout_seconds_);
  std::vector<OcrRegion> regions;
  try {
    for (const auto& r : nlohmann::json::parse(out)) {
      OcrRegion region;
      region.text = r.at("text").get<std::string>();
      region.confidence = r.value("confidence", 1.0);
      if (auto b = r.find("bbox"); b != r.end() && b->is_array() && b->size() == 4) {
        region.bbox = b->get<std::array<double, 4>>();
      }
      regions.push_back(std::move(region));
    }
  } catch (const nlohmann::json::exception& e) {
    throw BackendUnavailable("OCR engine '" + id_ + "' produced malformed output: " +
                             e.what());
  }
  return regions;
}

std::unique_ptr<OcrEngine> make_ocr_engine(const nlohmann::json& config) {
  const std::string type = config.value("type", std::string("figure-text"));
  if (type == "figure-text") return std::make_unique<FigureTextEngine>();
  if (type == "external") {
    auto command = config.at("command").get<std::vector<std::string>>();
    std::string id = config.value("id", "external:" + (command.empty() ? std::string()
                                                                         : command.back()));
    return std::make_unique<ExternalOcrEngine>(std::move(id), std::move(command),
                                               config.value("timeout_seconds", 120.0));
  }
  if (type == "mock") return MockOcrEngine::FromTable(config.at("table"));
  throw ConfigError("unknown OCR engine type '" + type + "'");
}

std::string normalize_text(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u = nfkc().normalize(u, status);
  u.toLower(icu::Locale::getRoot());
  // Lowercasing can produce sequences that NFKC maps further.
  u = nfkc().normalize(u, status);
  if (U_FAILURE(status)) throw Error("ICU normalization failed");

  icu::UnicodeString collapsed;
  bool pending_space = false;
  for (int32_t i = 0; i < u.length();) {
    const UChar32 c = u.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c)) {
      pending_space = !collapsed.isEmpty();
      continue;
    }
    if (pending_space) collapsed.append(static_cast<UChar>(u' '));
    pending_space = false;
    collapsed.append(c);
  }
  std::string out;
  collapsed.toUTF8String(out);
  return out;
}

std::set<std::string> normalize(std::span<const std::string> strings) {
  std::set<std::string> out;
  for (const auto& s : strings) {
    std::string n = normalize_text(s);
    if (!n.empty()) out.insert(std::move(n));
  }
  return out;
}

nlohmann::json to_json(const TextSet& t) {
  return {{"strings", t.strings}, {"engine_id", t.engine_id}, {"raw_count", t.raw_count}};
}

TextSet text_set_from_json(const nlohmann::json& j) {
  TextSet t;
  t.strings = j.at("strings").get<std::set<std::string>>();
  t.engine_id = j.at("engine_id").get<std::string>();
  t.raw_count = j.at("raw_count").get<std::size_t>();
  return t;
}

TextSet extract_text(std::string_view png_bytes, const OcrEngine& engine,
                     double min_confidence) {
  TextSet out;
  out.engine_id = engine.id();
  const auto regions = engine.recognize(png_bytes);
  out.raw_count = regions.size();
  std::vector<std::string> kept;
  for (const auto& r : regions) {
    if (r.confidence >= min_confidence) kept.push_back(r.text);
  }
  out.strings = normalize(kept);
  return out;
}

OcrRecord make_ocr_record(std::string sample_id, TextSet t, TextSet t_hat) {
  OcrRecord r;
  r.sample_id = std::move(sample_id);
  for (const auto& s : t_hat.strings) {
    if (t.strings.contains(s)) ++r.intersection_size;
  }
  r.t = std::move(t);
  r.t_hat = std::move(t_hat);
  return r;
}

ScoreTriple ocrscore(std::span<const OcrRecord> records) {
  if (records.empty()) throw UndefinedAggregate("ocrscore: no OCR records");
  std::size_t inter = 0, pred = 0, ref = 0;
  for (const auto& r : records) {
    inter += r.intersection_size;
    pred += r.t_hat.strings.size();
    ref += r.t.strings.size();
  }
  return score_from_counts(inter, pred, ref, records.size());
}

double edit_similarity(std::string_view a, std::string_view b) {
  const auto ca = to_code_points(a);
  const auto cb = to_code_points(b);
  const std::size_t longest = std::max(ca.size(), cb.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(ca, cb)) / static_cast<double>(longest);
}

ScoreTriple ocrscore_fuzzy(std::span<const OcrRecord> records, double threshold) {
  if (records.empty()) throw UndefinedAggregate("ocrscore: no OCR records");
  std::size_t inter = 0, pred = 0, ref = 0;
  for (const auto& r : records) {
    inter += fuzzy_matches(r.t.strings, r.t_hat.strings, threshold);
    pred += r.t_hat.strings.size();
    ref += r.t.strings.size();
  }
  return score_from_counts(inter, pred, ref, records.size());
}

}  // namespace capcheck
