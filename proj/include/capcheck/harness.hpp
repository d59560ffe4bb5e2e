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

#ifndef CAPCHECK_HARNESS_HPP_
#define CAPCHECK_HARNESS_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "capcheck/cache.hpp"
#include "capcheck/ocr.hpp"
#include "capcheck/prompts.hpp"
#include "capcheck/reconstructor.hpp"
#include "capcheck/sandbox.hpp"
#include "capcheck/score.hpp"
#include "capcheck/similarity.hpp"
#include "capcheck/text_backend.hpp"
#include "json.hpp"

namespace capcheck {

struct RunConfig {
  fs::path manifest_path;
  fs::path output_dir;
  fs::path cache_dir;  // defaults to <output_dir>/cache

  // {"type": "mock", ...transcript} or {"type": "http", "base_url", "model", ...}
  nlohmann::json text_backend;
  std::vector<nlohmann::json> encoders;  // see make_encoder
  nlohmann::json ocr = {{"type", "figure-text"}};
  double ocr_min_confidence = 0.0;

  fs::path prompts_dir;  // defaults to the shipped prompts
  std::string prompts_version = "v1";
  int max_attempts = 3;
  SandboxConfig sandbox;

  // Failed reconstructions count as similarity 0 and an empty OCR set
  // unless excluded.
  bool exclude_failures = false;
  bool coverage = true;
  int workers = 4;

  // Evaluate a seeded random subset instead of the whole manifest.
  std::optional<std::size_t> max_samples;
  std::uint64_t seed = 0;

  // Fail instead of calling the text backend or sandbox (used by `score`).
  bool require_cached_reconstructions = false;

  // Throws ConfigError.
  void validate() const;
  fs::path effective_cache_dir() const;
};

// Relative paths inside `j` resolve against `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base_dir = {});
nlohmann::json to_json(const RunConfig& c);

// Digest over everything that can change results. Output and cache
// locations, worker count and the cache-only flag are excluded.
Digest config_digest(const RunConfig& c);

struct SampleRecord {
  std::string sample_id;
  std::string original_image_digest;
  bool reconstruction_succeeded = false;
  int attempts = 0;
  std::vector<std::string> attempt_outcomes;
  std::optional<std::string> rendered_image_ref;
  std::map<std::string, double> similarity;  // backend id -> cosine
  OcrRecord ocr;
  std::optional<nlohmann::json> coverage;
  double duration_seconds = 0;  // excluded from the canonical form

  friend bool operator==(const SampleRecord& a, const SampleRecord& b);
};

struct CorpusScores {
  std::size_t n = 0;
  std::map<std::string, double> vcs_by_backend;
  ScoreTriple ocr;
  std::size_t failures = 0;
  double mean_attempts = 0;

  friend bool operator==(const CorpusScores&, const CorpusScores&) = default;
};

// Order-independent fold over the records. Throws UndefinedAggregate for an
// empty record list or when every record is excluded.
CorpusScores aggregate(std::span<const SampleRecord> records,
                       const std::vector<std::string>& backend_ids, bool exclude_failures);

struct RunReport {
  std::string config_digest;
  nlohmann::json config;
  std::vector<std::string> backend_ids;  // encoder ids, config order
  std::string text_backend_id;
  std::string ocr_engine_id;
  std::string sandbox_digest;
  std::vector<SampleRecord> records;  // manifest order
  CorpusScores scores;
  std::optional<std::uint64_t> sampling_seed;
  std::string started_at;
  std::string finished_at;
  std::map<std::string, std::size_t> backend_calls;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

// Full report including timestamps, durations and call counts.
nlohmann::json to_json(const RunReport& r);
RunReport run_report_from_json(const nlohmann::json& j);
// Timestamps, durations and call counts stripped; keys sorted. Two runs with
// deterministic backends produce byte-identical output.
std::string canonical_json(const RunReport& r);

// Throws Error if the stored aggregates differ from a recomputation.
void check_consistency(const RunReport& r);

enum class ExportFormat { kJson, kCsv };
// CSV: one header row, one row per sample, then `#aggregate,<name>,<value>`
// footer rows.
std::string export_report(const RunReport& r, ExportFormat format);
void export_report(const RunReport& r, ExportFormat format, const fs::path& path);
RunReport load_report(const fs::path& run_dir);

// Live backends for a run. Members left empty are built from the config.
struct Backends {
  std::shared_ptr<TextBackend> text;
  std::shared_ptr<CodeRunner> runner;
  std::vector<std::shared_ptr<const EmbeddingBackend>> encoders;
  std::shared_ptr<const OcrEngine> ocr;
  std::shared_ptr<const PromptSet> prompts;
};

Backends make_backends(const RunConfig& config);
std::shared_ptr<TextBackend> make_text_backend(const nlohmann::json& config);

struct RunResult {
  RunReport report;
  std::shared_ptr<CallAudit> audit;
};

// Reconstructs, scores and aggregates every sample, writing report.json,
// report.canonical.json and cache_audit.log to the output dir. Each stage
// result is cached as soon as it completes, so a run aborted by an
// InfrastructureError resumes where it stopped.
RunResult run_eval(const RunConfig& config);
RunResult run_eval(const RunConfig& config, Backends backends);

}  // namespace capcheck

#endif  // CAPCHECK_HARNESS_HPP_
