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

#include "capcheck/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "capcheck/error.hpp"
#include "capcheck/schema.hpp"

namespace capcheck {
namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

nlohmann::json sandbox_to_json(const SandboxConfig& s) {
  return {
      {"interpreter", s.interpreter},
      {"temp_root", s.temp_root.string()},
      {"wall_timeout_seconds", s.limits.wall_timeout_seconds},
      {"memory_cap_bytes", s.limits.memory_cap_bytes},
      {"deny_network", s.limits.deny_network},
      {"retain_workdir", s.limits.retain_workdir},
      {"dpi", s.limits.dpi},
  };
}

SandboxConfig sandbox_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kKeys = {
      "interpreter",   "temp_root", "wall_timeout_seconds", "memory_cap_bytes",
      "deny_network", "retain_workdir", "dpi"};
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.contains(k)) throw ConfigError("unknown sandbox setting '" + k + "'");
  }
  SandboxConfig s;
  s.interpreter = j.value("interpreter", s.interpreter);
  s.temp_root = j.value("temp_root", std::string());
  s.limits.wall_timeout_seconds = j.value("wall_timeout_seconds", s.limits.wall_timeout_seconds);
  s.limits.memory_cap_bytes = j.value("memory_cap_bytes", s.limits.memory_cap_bytes);
  s.limits.deny_network = j.value("deny_network", s.limits.deny_network);
  s.limits.retain_workdir = j.value("retain_workdir", s.limits.retain_workdir);
  s.limits.dpi = j.value("dpi", s.limits.dpi);
  return s;
}

// The config fields that can change results.
nlohmann::json digest_input(const RunConfig& c) {
  nlohmann::json j = to_json(c);
  for (const char* k : {"output_dir", "cache_dir", "workers", "require_cached_reconstructions",
                        "manifest"}) {
    j.erase(k);
  }
  j["sandbox"] = c.sandbox.fingerprint();
  std::error_code ec;
  j["manifest_digest"] = fs::is_regular_file(c.manifest_path, ec)
                             ? content_hash(read_file(c.manifest_path)).hex()
                             : std::string();
  if (c.prompts_dir.empty()) j.erase("prompts_dir");
  return j;
}

// Text backend wrapper that records every call reaching the real backend.
class AuditedText : public TextBackend {
 public:
  AuditedText(TextBackend& inner, CallAudit& audit, std::string sample_id, bool forbid)
      : inner_(inner), audit_(audit), sample_id_(std::move(sample_id)), forbid_(forbid) {}
  std::string id() const override { return inner_.id(); }
  std::string complete(const TextRequest& request) override {
    if (forbid_) {
      throw ConfigError("sample '" + sample_id_ + "' has no cached reconstruction");
    }
    audit_.record(CallAudit::kTextGeneration, sample_id_);
    return inner_.complete(request);
  }

 private:
  TextBackend& inner_;
  CallAudit& audit_;
  std::string sample_id_;
  bool forbid_;
};

// Image cache in front of the sandbox, keyed by hash(code, sandbox config).
class CachingRunner : public CodeRunner {
 public:
  CachingRunner(CodeRunner& inner, const Cache& cache, CallAudit& audit,
                std::string sample_id)
      : inner_(inner), cache_(cache), audit_(audit), sample_id_(std::move(sample_id)) {}

  std::string fingerprint() const override { return inner_.fingerprint(); }

  RenderOutcome run(std::string_view code) override {
    const Digest key = content_hash_parts({"render", code, inner_.fingerprint()});
    if (auto hit = cache_.get("render", key)) {
      const auto j = nlohmann::json::parse(*hit);
      RenderOutcome o;
      o.status = parse_render_status(j.at("status").get<std::string>());
      o.stderr_tail = j.at("stderr_tail").get<std::string>();
      o.detail = j.at("detail").get<std::string>();
      o.figure_count = j.at("figure_count").get<int>();
      o.width = j.at("width").get<int>();
      o.height = j.at("height").get<int>();
      o.figure_texts = j.at("figure_texts").get<std::vector<std::string>>();
      o.network_mechanism = j.at("network_mechanism").get<std::string>();
      if (const auto& d = j.at("image"); !d.is_null()) {
        o.image_png = cache_.get_blob(Digest::FromHex(d.get<std::string>()));
      }
      return o;
    }
    audit_.record(CallAudit::kSandbox, sample_id_);
    RenderOutcome o = inner_.run(code);
    // Timeouts depend on machine load; they are retried next run.
    if (o.status != RenderStatus::kTimeout) {
      nlohmann::json j = {
          {"status", std::string(to_string(o.status))},
          {"stderr_tail", o.stderr_tail},
          {"detail", o.detail},
          {"figure_count", o.figure_count},
          {"width", o.width},
          {"height", o.height},
          {"figure_texts", o.figure_texts},
          {"network_mechanism", o.network_mechanism},
          {"image", nullptr},
      };
      if (!o.image_png.empty()) j["image"] = cache_.put_blob(o.image_png).hex();
      cache_.put("render", key, j.dump());
    }
    return o;
  }

 private:
  CodeRunner& inner_;
  const Cache& cache_;
  CallAudit& audit_;
  std::string sample_id_;
};

struct Context {
  const RunConfig& config;
  const Manifest& manifest;
  Backends& backends;
  const Cache& cache;
  CallAudit& audit;
  std::string prompts_digest;
};

Reconstruction cached_reconstruction(const Context& ctx, const ChartSample& sample) {
  const Digest key = content_hash_parts(
      {"reconstruction", sample.caption, ctx.backends.text->id(),
       ctx.backends.prompts->version, ctx.prompts_digest,
       std::to_string(ctx.config.max_attempts), ctx.backends.runner->fingerprint()});
  if (auto hit = ctx.cache.get("reconstruction", key)) {
    Reconstruction r = reconstruction_from_json(nlohmann::json::parse(*hit));
    r.sample_id = sample.id;
    if (r.rendered_image_ref) {
      r.image_png = ctx.cache.get_blob(Digest::FromHex(r.rendered_image_ref->substr(7)));
    }
    return r;
  }
  AuditedText text(*ctx.backends.text, ctx.audit, sample.id,
                   ctx.config.require_cached_reconstructions);
  CachingRunner runner(*ctx.backends.runner, ctx.cache, ctx.audit, sample.id);
  Reconstruction r = reconstruct(sample, text, runner, *ctx.backends.prompts,
                                 ctx.config.max_attempts);
  if (r.succeeded()) ctx.cache.put_blob(r.image_png);
  ctx.cache.put("reconstruction", key, to_json(r).dump());
  return r;
}

double cached_similarity(const Context& ctx, const EmbeddingBackend& encoder,
                         std::string_view sample_id, const std::string& original_png,
                         const Digest& original_digest, const std::string& recon_png,
                         const Digest& recon_digest) {
  const std::string backend_id = encoder.id();
  const Digest key = content_hash_parts(
      {"similarity", original_digest.hex(), recon_digest.hex(), backend_id});
  if (auto hit = ctx.cache.get("similarity", key)) return std::stod(*hit);
  ctx.audit.record(CallAudit::kEncoder, std::string(sample_id) + " " + backend_id);
  const double sim = cosine(embed(original_png, encoder), embed(recon_png, encoder));
  ctx.cache.put("similarity", key, format_double(sim));
  return sim;
}

TextSet cached_text(const Context& ctx, std::string_view sample_id, const std::string& png,
                    const Digest& digest) {
  const OcrEngine& engine = *ctx.backends.ocr;
  const Digest key = content_hash_parts(
      {"ocr", digest.hex(), engine.id(), format_double(ctx.config.ocr_min_confidence)});
  if (auto hit = ctx.cache.get("ocr", key)) {
    return text_set_from_json(nlohmann::json::parse(*hit));
  }
  ctx.audit.record(CallAudit::kOcr, std::string(sample_id));
  TextSet t = extract_text(png, engine, ctx.config.ocr_min_confidence);
  ctx.cache.put("ocr", key, to_json(t).dump());
  return t;
}

SampleRecord evaluate_sample(const Context& ctx, const ChartSample& sample) {
  const auto start = std::chrono::steady_clock::now();
  SampleRecord rec;
  rec.sample_id = sample.id;

  const fs::path original_path = image_path(ctx.manifest, sample);
  std::error_code ec;
  if (!fs::is_regular_file(original_path, ec)) {
    throw DataError("sample '" + sample.id + "': image not found: " + original_path.string());
  }
  const std::string original = read_file(original_path);
  const Digest original_digest = content_hash(original);
  rec.original_image_digest = original_digest.hex();

  const Reconstruction recon = cached_reconstruction(ctx, sample);
  rec.reconstruction_succeeded = recon.succeeded();
  rec.attempts = static_cast<int>(recon.attempts.size());
  for (const auto& a : recon.attempts) rec.attempt_outcomes.emplace_back(to_string(a.outcome));
  rec.rendered_image_ref = recon.rendered_image_ref;

  const Digest recon_digest =
      recon.succeeded() ? content_hash(recon.image_png) : Digest();
  for (const auto& encoder : ctx.backends.encoders) {
    rec.similarity[encoder->id()] =
        recon.succeeded() ? cached_similarity(ctx, *encoder, sample.id, original,
                                              original_digest, recon.image_png, recon_digest)
                          : 0.0;
  }

  TextSet t = cached_text(ctx, sample.id, original, original_digest);
  TextSet t_hat = recon.succeeded() ? cached_text(ctx, sample.id, recon.image_png, recon_digest)
                                    : TextSet{{}, ctx.backends.ocr->id(), 0};
  rec.ocr = make_ocr_record(sample.id, std::move(t), std::move(t_hat));

  if (ctx.config.coverage && sample.chart_type) {
    rec.coverage = to_json(coverage(sample.caption, *sample.chart_type));
  }
  rec.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<const ChartSample*> select_samples(const Manifest& m, const RunConfig& c) {
  std::vector<const ChartSample*> out;
  for (const auto& s : m.samples) out.push_back(&s);
  if (!c.max_samples || *c.max_samples >= out.size()) return out;
  std::vector<std::size_t> idx(out.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(c.seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(*c.max_samples);
  std::sort(idx.begin(), idx.end());
  std::vector<const ChartSample*> subset;
  for (auto i : idx) subset.push_back(out[i]);
  return subset;
}

std::string prompts_digest(const PromptSet& p) {
  return content_hash_parts({p.version, p.regen_system, p.regen_template, p.debug_system,
                             p.debug_template})
      .hex();
}

}  // namespace

void RunConfig::validate() const {
  if (manifest_path.empty()) throw ConfigError("config: manifest is required");
  if (output_dir.empty()) throw ConfigError("config: output_dir is required");
  if (text_backend.is_null()) throw ConfigError("config: text_backend is required");
  if (encoders.empty()) throw ConfigError("config: at least one encoder is required");
  if (max_attempts < 1) throw ConfigError("config: max_attempts must be >= 1");
  if (workers < 1) throw ConfigError("config: workers must be >= 1");
  if (ocr_min_confidence < 0 || ocr_min_confidence > 1) {
    throw ConfigError("config: ocr_min_confidence must lie in [0, 1]");
  }
  if (sandbox.limits.wall_timeout_seconds <= 0) {
    throw ConfigError("config: sandbox wall_timeout_seconds must be positive");
  }
}

fs::path RunConfig::effective_cache_dir() const {
  if (!cache_dir.empty()) return cache_dir;
  if (const char* env = std::getenv("CAPCHECK_CACHE"); env && *env) return env;
  return output_dir / "cache";
}

RunConfig run_config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  static const std::set<std::string> kKeys = {
      "manifest",      "output_dir",         "cache_dir",       "text_backend",
      "encoders",      "ocr",                "ocr_min_confidence", "prompts_dir",
      "prompts_version", "max_attempts",     "sandbox",         "exclude_failures",
      "coverage",      "workers",            "max_samples",     "seed",
      "require_cached_reconstructions"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.contains(k)) throw ConfigError("unknown config key '" + k + "'");
  }
  try {
    RunConfig c;
    c.manifest_path = resolve(j.value("manifest", std::string()), base_dir);
    c.output_dir = resolve(j.value("output_dir", std::string()), base_dir);
    c.cache_dir = resolve(j.value("cache_dir", std::string()), base_dir);
    c.text_backend = j.value("text_backend", nlohmann::json());
    if (c.text_backend.is_object() && c.text_backend.contains("transcript_path")) {
      // Inline the transcript so the config digest covers its content.
      const fs::path p =
          resolve(c.text_backend["transcript_path"].get<std::string>(), base_dir);
      c.text_backend["transcript"] = nlohmann::json::parse(read_file(p));
      c.text_backend.erase("transcript_path");
    }
    for (auto e : j.value("encoders", nlohmann::json::array())) {
      if (e.contains("model_path")) {
        e["model_path"] = resolve(e["model_path"].get<std::string>(), base_dir).string();
      }
      c.encoders.push_back(std::move(e));
    }
    if (j.contains("ocr")) c.ocr = j.at("ocr");
    c.ocr_min_confidence = j.value("ocr_min_confidence", c.ocr_min_confidence);
    c.prompts_dir = resolve(j.value("prompts_dir", std::string()), base_dir);
    c.prompts_version = j.value("prompts_version", c.prompts_version);
    c.max_attempts = j.value("max_attempts", c.max_attempts);
    if (j.contains("sandbox")) c.sandbox = sandbox_from_json(j.at("sandbox"));
    c.exclude_failures = j.value("exclude_failures", c.exclude_failures);
    c.coverage = j.value("coverage", c.coverage);
    c.workers = j.value("workers", c.workers);
    if (j.contains("max_samples") && !j.at("max_samples").is_null()) {
      c.max_samples = j.at("max_samples").get<std::size_t>();
    }
    c.seed = j.value("seed", c.seed);
    c.require_cached_reconstructions =
        j.value("require_cached_reconstructions", c.require_cached_reconstructions);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

nlohmann::json to_json(const RunConfig& c) {
  return {
      {"manifest", c.manifest_path.string()},
      {"output_dir", c.output_dir.string()},
      {"cache_dir", c.cache_dir.string()},
      {"text_backend", c.text_backend},
      {"encoders", c.encoders},
      {"ocr", c.ocr},
      {"ocr_min_confidence", c.ocr_min_confidence},
      {"prompts_dir", c.prompts_dir.string()},
      {"prompts_version", c.prompts_version},
      {"max_attempts", c.max_attempts},
      {"sandbox", sandbox_to_json(c.sandbox)},
      {"exclude_failures", c.exclude_failures},
      {"coverage", c.coverage},
      {"workers", c.workers},
      {"max_samples", c.max_samples ? nlohmann::json(*c.max_samples) : nlohmann::json()},
      {"seed", c.seed},
      {"require_cached_reconstructions", c.require_cached_reconstructions},
  };
}

Digest config_digest(const RunConfig& c) { return content_hash(digest_input(c).dump()); }

CorpusScores aggregate(std::span<const SampleRecord> records,
                       const std::vector<std::string>& backend_ids, bool exclude_failures) {
  if (records.empty()) throw UndefinedAggregate("no sample records");
  CorpusScores s;
  s.n = records.size();
  long long attempts = 0;
  std::vector<OcrRecord> ocr;
  for (const auto& r : records) {
    if (!r.reconstruction_succeeded) ++s.failures;
    attempts += r.attempts;
    if (!exclude_failures || r.reconstruction_succeeded) ocr.push_back(r.ocr);
  }
  s.mean_attempts = static_cast<double>(attempts) / static_cast<double>(s.n);
  for (const auto& id : backend_ids) {
    std::vector<SimilarityRecord> sims;
    for (const auto& r : records) {
      auto it = r.similarity.find(id);
      if (it == r.similarity.end()) {
        throw DataError("sample '" + r.sample_id + "' has no similarity for '" + id + "'");
      }
      sims.push_back({r.sample_id, id, it->second, !r.reconstruction_succeeded});
    }
    s.vcs_by_backend[id] = vcs(sims, exclude_failures);
  }
  s.ocr = ocrscore(ocr);
  return s;
}

std::shared_ptr<TextBackend> make_text_backend(const nlohmann::json& config) {
  const std::string type = config.value("type", std::string());
  if (type == "mock") {
    return std::shared_ptr<TextBackend>(
        ScriptedBackend::FromTranscript(config.value("transcript", config)));
  }
  if (type == "http") {
    HttpBackendConfig h;
    h.base_url = config.at("base_url").get<std::string>();
    h.path = config.value("path", h.path);
    h.model = config.at("model").get<std::string>();
    h.api_key_env = config.value("api_key_env", h.api_key_env);
    h.temperature = config.value("temperature", h.temperature);
    h.timeout_seconds = config.value("timeout_seconds", h.timeout_seconds);
    RetryPolicy p;
    p.max_retries = config.value("max_retries", p.max_retries);
    p.max_requests_per_second =
        config.value("max_requests_per_second", p.max_requests_per_second);
    return std::make_shared<RetryingBackend>(std::make_shared<HttpBackend>(h), p);
  }
  throw ConfigError("unknown text backend type '" + type + "'");
}

Backends make_backends(const RunConfig& config) {
  Backends b;
  b.text = make_text_backend(config.text_backend);
  b.runner = std::make_shared<ProcessSandbox>(config.sandbox);
  for (const auto& e : config.encoders) b.encoders.push_back(make_encoder(e));
  b.ocr = make_ocr_engine(config.ocr);
  b.prompts = std::make_shared<const PromptSet>(
      config.prompts_dir.empty() ? load_prompts(resource_root() / "prompts",
                                                config.prompts_version)
                                 : load_prompts(config.prompts_dir, config.prompts_version));
  return b;
}

RunResult run_eval(const RunConfig& config) {
  config.validate();
  return run_eval(config, make_backends(config));
}

RunResult run_eval(const RunConfig& config, Backends backends) {
  config.validate();
  if (!backends.text || !backends.runner || !backends.ocr || !backends.prompts ||
      backends.encoders.empty()) {
    Backends built = make_backends(config);
    if (!backends.text) backends.text = built.text;
    if (!backends.runner) backends.runner = built.runner;
    if (backends.encoders.empty()) backends.encoders = built.encoders;
    if (!backends.ocr) backends.ocr = built.ocr;
    if (!backends.prompts) backends.prompts = built.prompts;
  }
  std::set<std::string> seen;
  for (const auto& e : backends.encoders) {
    if (!seen.insert(e->id()).second) {
      throw ConfigError("encoder '" + e->id() + "' is configured twice");
    }
  }

  const Manifest manifest = load_manifest(config.manifest_path);
  const auto samples = select_samples(manifest, config);
  if (samples.empty()) throw ConfigError("manifest '" + manifest.source_path + "' is empty");

  const Cache cache(config.effective_cache_dir());
  auto audit = std::make_shared<CallAudit>();
  const Context ctx{config, manifest, backends, cache, *audit, prompts_digest(*backends.prompts)};

  RunReport report;
  report.started_at = utc_now();

  std::vector<std::optional<SampleRecord>> results(samples.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  {
    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(config.workers), samples.size());
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) {
      pool.emplace_back([&] {
        while (!stop.load()) {
          const std::size_t i = next.fetch_add(1);
          if (i >= samples.size()) return;
          try {
            results[i] = evaluate_sample(ctx, *samples[i]);
          } catch (...) {
            std::lock_guard lock(error_mu);
            if (!first_error) first_error = std::current_exception();
            stop.store(true);
          }
        }
      });
    }
  }
  if (first_error) {
    // Completed stages are already in the cache; record progress so the
    // next run's resume point is visible.
    nlohmann::json done = nlohmann::json::array();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (results[i]) done.push_back(samples[i]->id);
    }
    write_file_atomic(config.output_dir / "checkpoint.json",
                      nlohmann::json{{"config_digest", config_digest(config).hex()},
                                     {"completed", done}}
                          .dump(2));
    std::rethrow_exception(first_error);
  }

  report.config_digest = config_digest(config).hex();
  report.config = digest_input(config);
  for (const auto& e : backends.encoders) report.backend_ids.push_back(e->id());
  report.text_backend_id = backends.text->id();
  report.ocr_engine_id = backends.ocr->id();
  report.sandbox_digest = backends.runner->fingerprint();
  for (auto& r : results) report.records.push_back(std::move(*r));
  report.scores = aggregate(report.records, report.backend_ids, config.exclude_failures);
  if (config.max_samples && *config.max_samples < manifest.samples.size()) {
    report.sampling_seed = config.seed;
  }
  for (int k = 0; k < CallAudit::kKindCount; ++k) {
    const auto kind = static_cast<CallAudit::Kind>(k);
    report.backend_calls[std::string(CallAudit::name(kind))] = audit->count(kind);
  }
  report.finished_at = utc_now();
  check_consistency(report);

  std::string log;
  for (const auto& line : audit->lines()) log += line + "\n";
  write_file_atomic(config.output_dir / "cache_audit.log", log);
  write_file_atomic(config.output_dir / "run_config.json", to_json(config).dump(2) + "\n");
  write_file_atomic(config.output_dir / "report.json", to_json(report).dump(2) + "\n");
  write_file_atomic(config.output_dir / "report.canonical.json", canonical_json(report));
  std::error_code ec;
  fs::remove(config.output_dir / "checkpoint.json", ec);
  return {std::move(report), std::move(audit)};
}

}  // namespace capcheck
