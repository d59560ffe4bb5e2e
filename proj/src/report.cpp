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

#include <cstdio>

#include "capcheck/error.hpp"
#include "capcheck/harness.hpp"

namespace capcheck {
namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

nlohmann::json record_to_json(const SampleRecord& r, bool canonical) {
  nlohmann::json j = {
      {"sample_id", r.sample_id},
      {"original_image_digest", r.original_image_digest},
      {"reconstruction_succeeded", r.reconstruction_succeeded},
      {"attempts", r.attempts},
      {"attempt_outcomes", r.attempt_outcomes},
      {"rendered_image_ref",
       r.rendered_image_ref ? nlohmann::json(*r.rendered_image_ref) : nlohmann::json()},
      {"similarity", r.similarity},
      {"ocr",
       {{"t", to_json(r.ocr.t)},
        {"t_hat", to_json(r.ocr.t_hat)},
        {"intersection_size", r.ocr.intersection_size}}},
      {"coverage", r.coverage ? *r.coverage : nlohmann::json()},
  };
  if (!canonical) j["duration_seconds"] = r.duration_seconds;
  return j;
}

SampleRecord record_from_json(const nlohmann::json& j) {
  SampleRecord r;
  r.sample_id = j.at("sample_id").get<std::string>();
  r.original_image_digest = j.at("original_image_digest").get<std::string>();
  r.reconstruction_succeeded = j.at("reconstruction_succeeded").get<bool>();
  r.attempts = j.at("attempts").get<int>();
  r.attempt_outcomes = j.at("attempt_outcomes").get<std::vector<std::string>>();
  if (const auto& ref = j.at("rendered_image_ref"); !ref.is_null()) {
    r.rendered_image_ref = ref.get<std::string>();
  }
  r.similarity = j.at("similarity").get<std::map<std::string, double>>();
  const auto& ocr = j.at("ocr");
  r.ocr.sample_id = r.sample_id;
  r.ocr.t = text_set_from_json(ocr.at("t"));
  r.ocr.t_hat = text_set_from_json(ocr.at("t_hat"));
  r.ocr.intersection_size = ocr.at("intersection_size").get<std::size_t>();
  if (const auto& c = j.at("coverage"); !c.is_null()) r.coverage = c;
  r.duration_seconds = j.value("duration_seconds", 0.0);
  return r;
}

nlohmann::json scores_to_json(const CorpusScores& s) {
  return {
      {"n", s.n},
      {"vcs_by_backend", s.vcs_by_backend},
      {"ocr", to_json(s.ocr)},
      {"failures", s.failures},
      {"mean_attempts", s.mean_attempts},
  };
}

CorpusScores scores_from_json(const nlohmann::json& j) {
  CorpusScores s;
  s.n = j.at("n").get<std::size_t>();
  s.vcs_by_backend = j.at("vcs_by_backend").get<std::map<std::string, double>>();
  s.ocr = score_triple_from_json(j.at("ocr"));
  s.failures = j.at("failures").get<std::size_t>();
  s.mean_attempts = j.at("mean_attempts").get<double>();
  return s;
}

nlohmann::json report_body(const RunReport& r, bool canonical) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& rec : r.records) records.push_back(record_to_json(rec, canonical));
  nlohmann::json j = {
      {"config_digest", r.config_digest},
      {"config", r.config},
      {"backend_ids", r.backend_ids},
      {"text_backend_id", r.text_backend_id},
      {"ocr_engine_id", r.ocr_engine_id},
      {"sandbox_digest", r.sandbox_digest},
      {"records", records},
      {"scores", scores_to_json(r.scores)},
      {"sampling_seed", r.sampling_seed ? nlohmann::json(*r.sampling_seed) : nlohmann::json()},
  };
  if (!canonical) {
    j["started_at"] = r.started_at;
    j["finished_at"] = r.finished_at;
    j["backend_calls"] = r.backend_calls;
  }
  return j;
}

}  // namespace

bool operator==(const SampleRecord& a, const SampleRecord& b) {
  return a.sample_id == b.sample_id && a.original_image_digest == b.original_image_digest &&
         a.reconstruction_succeeded == b.reconstruction_succeeded &&
         a.attempts == b.attempts && a.attempt_outcomes == b.attempt_outcomes &&
         a.rendered_image_ref == b.rendered_image_ref && a.similarity == b.similarity &&
         a.ocr.sample_id == b.ocr.sample_id && a.ocr.t == b.ocr.t &&
         a.ocr.t_hat == b.ocr.t_hat && a.ocr.intersection_size == b.ocr.intersection_size &&
         a.coverage == b.coverage && a.duration_seconds == b.duration_seconds;
}

nlohmann::json to_json(const RunReport& r) { return report_body(r, false); }

RunReport run_report_from_json(const nlohmann::json& j) {
  try {
    RunReport r;
    r.config_digest = j.at("config_digest").get<std::string>();
    r.config = j.at("config");
    r.backend_ids = j.at("backend_ids").get<std::vector<std::string>>();
    r.text_backend_id = j.at("text_backend_id").get<std::string>();
    r.ocr_engine_id = j.at("ocr_engine_id").get<std::string>();
    r.sandbox_digest = j.at("sandbox_digest").get<std::string>();
    for (const auto& rec : j.at("records")) r.records.push_back(record_from_json(rec));
    r.scores = scores_from_json(j.at("scores"));
    if (const auto& s = j.at("sampling_seed"); !s.is_null()) {
      r.sampling_seed = s.get<std::uint64_t>();
    }
    r.started_at = j.value("started_at", std::string());
    r.finished_at = j.value("finished_at", std::string());
    r.backend_calls = j.value("backend_calls", std::map<std::string, std::size_t>{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed run report: ") + e.what());
  }
}

std::string canonical_json(const RunReport& r) {
  return report_body(r, true).dump(2) + "\n";
}

void check_consistency(const RunReport& r) {
  const bool exclude = r.config.value("exclude_failures", false);
  const CorpusScores again = aggregate(r.records, r.backend_ids, exclude);
  if (!(again == r.scores)) {
    throw Error("run report aggregates do not match their per-sample records");
  }
}

std::string export_report(const RunReport& r, ExportFormat format) {
  if (format == ExportFormat::kJson) return to_json(r).dump(2) + "\n";

  std::string out = "sample_id,status,attempts";
  for (const auto& id : r.backend_ids) out += "," + csv_field("sim:" + id);
  out += ",ocr_t,ocr_t_hat,ocr_intersection\n";
  for (const auto& rec : r.records) {
    out += csv_field(rec.sample_id);
    out += rec.reconstruction_succeeded ? ",succeeded," : ",failed,";
    out += std::to_string(rec.attempts);
    for (const auto& id : r.backend_ids) out += "," + format_double(rec.similarity.at(id));
    out += "," + std::to_string(rec.ocr.t.strings.size());
    out += "," + std::to_string(rec.ocr.t_hat.strings.size());
    out += "," + std::to_string(rec.ocr.intersection_size) + "\n";
  }
  auto footer = [&](const std::string& name, const std::string& value) {
    out += "#aggregate," + csv_field(name) + "," + value + "\n";
  };
  footer("n", std::to_string(r.scores.n));
  footer("failures", std::to_string(r.scores.failures));
  footer("mean_attempts", format_double(r.scores.mean_attempts));
  for (const auto& id : r.backend_ids) {
    footer("vcs:" + id, format_double(r.scores.vcs_by_backend.at(id)));
  }
  footer("ocr_precision", format_double(r.scores.ocr.precision));
  footer("ocr_recall", format_double(r.scores.ocr.recall));
  footer("ocr_f1", format_double(r.scores.ocr.f1));
  return out;
}

void export_report(const RunReport& r, ExportFormat format, const fs::path& path) {
  write_file_atomic(path, export_report(r, format));
}

RunReport load_report(const fs::path& run_dir) {
  const fs::path p = run_dir / "report.json";
  try {
    return run_report_from_json(nlohmann::json::parse(read_file(p)));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

}  // namespace capcheck
