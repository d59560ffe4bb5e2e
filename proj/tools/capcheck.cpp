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

// capcheck command-line interface.
//
//   capcheck evaluate --config run.json [--manifest m.jsonl] [--out dir]
//   capcheck score --run dir --encoder '{"type": "reference"}' ...
//   capcheck export --run dir --format csv
//   capcheck export --state dir --accepted-only
//   capcheck schema-check --manifest m.jsonl [--type-field chart_type]
//   capcheck agreement --judgments j.jsonl --scores s.json ... --criterion accuracy
//   capcheck serve --state dir [--config service.json] [--port 8080]
//
// Exit codes: 0 success, 2 configuration or input error, 3 infrastructure
// failure (the run can be resumed), 1 anything else.

#include <cstdio>
#include <map>
#include <sstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "capcheck/agreement.hpp"
#include "capcheck/error.hpp"
#include "capcheck/harness.hpp"
#include "capcheck/schema.hpp"
#include "capcheck/verify.hpp"
#include "capcheck/verify_http.hpp"

namespace {

using capcheck::fs::path;
using nlohmann::json;

json read_json(const path& p) {
  try {
    return json::parse(capcheck::read_file(p));
  } catch (const json::parse_error& e) {
    throw capcheck::ParseError(p.string() + ": " + e.what());
  }
}

// Accepts an inline JSON object or the shorthand "ref-<side>".
json encoder_spec(const std::string& s) {
  if (s.starts_with("ref-")) {
    return {{"type", "reference"}, {"side", std::stoi(s.substr(4))}};
  }
  try {
    return json::parse(s);
  } catch (const json::parse_error&) {
    throw capcheck::ConfigError("--encoder must be JSON or ref-<side>: '" + s + "'");
  }
}

void print_summary(const capcheck::RunReport& r, const path& out) {
  std::printf("samples      %zu (failures %zu, mean attempts %.3f)\n", r.scores.n,
              r.scores.failures, r.scores.mean_attempts);
  for (const auto& [id, v] : r.scores.vcs_by_backend) std::printf("VCS %-8s %.6f\n", id.c_str(), v);
  std::printf("OCRScore     P %.6f  R %.6f  F1 %.6f\n", r.scores.ocr.precision,
              r.scores.ocr.recall, r.scores.ocr.f1);
  std::printf("report       %s\n", (out / "report.json").c_str());
}

int cmd_evaluate(const path& config_path, const std::string& manifest, const std::string& out,
                 int workers, const std::string& cache) {
  json j = read_json(config_path);
  const path base = config_path.parent_path();
  // Flags override the config file.
  if (!manifest.empty()) j["manifest"] = capcheck::fs::absolute(manifest).string();
  if (!out.empty()) j["output_dir"] = capcheck::fs::absolute(out).string();
  if (!cache.empty()) j["cache_dir"] = capcheck::fs::absolute(cache).string();
  if (workers > 0) j["workers"] = workers;
  const auto config = capcheck::run_config_from_json(j, base);
  const auto result = capcheck::run_eval(config);
  print_summary(result.report, config.output_dir);
  return 0;
}

int cmd_score(const path& run, const std::vector<std::string>& encoders, const std::string& out) {
  json j = read_json(run / "run_config.json");
  if (!encoders.empty()) {
    json list = json::array();
    for (const auto& e : encoders) list.push_back(encoder_spec(e));
    j["encoders"] = list;
  }
  j["require_cached_reconstructions"] = true;
  if (!j.contains("cache_dir") || j["cache_dir"].get<std::string>().empty()) {
    j["cache_dir"] = (run / "cache").string();
  }
  j["output_dir"] = out.empty() ? run.string() : capcheck::fs::absolute(out).string();
  const auto config = capcheck::run_config_from_json(j);
  const auto result = capcheck::run_eval(config);
  print_summary(result.report, config.output_dir);
  return 0;
}

int cmd_export(const std::string& run, const std::string& state, const std::string& format,
               bool accepted_only, const std::string& out) {
  std::string text;
  if (!state.empty()) {
    capcheck::VerifyConfig vc;
    vc.state_dir = state;
    vc.background = false;
    capcheck::VerifyService service(vc, {});
    text = service.export_manifest(accepted_only);
  } else if (!run.empty()) {
    if (format != "csv" && format != "json") {
      throw capcheck::ConfigError("--format must be csv or json");
    }
    const auto report = capcheck::load_report(run);
    capcheck::check_consistency(report);
    text = capcheck::export_report(report, format == "csv" ? capcheck::ExportFormat::kCsv
                                                           : capcheck::ExportFormat::kJson);
  } else {
    throw capcheck::ConfigError("export needs --run or --state");
  }
  if (out.empty()) {
    std::cout << text;
  } else {
    capcheck::write_file_atomic(out, text);
  }
  return 0;
}

int cmd_schema_check(const path& manifest_path, const std::string& type_field) {
  const auto manifest = capcheck::load_manifest(manifest_path);
  // The type may live under a custom field, so read the raw lines too.
  std::map<std::string, std::string> types;
  std::istringstream lines(capcheck::read_file(manifest_path));
  for (std::string line; std::getline(lines, line);) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line);
    if (j.contains(type_field) && j[type_field].is_string()) {
      types[j["id"].get<std::string>()] = j[type_field].get<std::string>();
    }
  }
  std::size_t checked = 0, skipped = 0;
  double ratio_sum = 0;
  for (const auto& s : manifest.samples) {
    auto it = types.find(s.id);
    json row = {{"id", s.id}};
    if (it == types.end()) {
      row["coverage"] = nullptr;
      row["note"] = "no chart type";
      ++skipped;
    } else {
      auto type = capcheck::parse_chart_type(it->second);
      if (!type) throw capcheck::DomainError("sample '" + s.id + "': unknown chart type '" +
                                             it->second + "'");
      const auto report = capcheck::coverage(s.caption, *type);
      row["coverage"] = capcheck::to_json(report);
      ratio_sum += report.coverage_ratio;
      ++checked;
    }
    std::cout << row.dump() << "\n";
  }
  std::fprintf(stderr, "checked %zu, skipped %zu, mean coverage %.4f\n", checked, skipped,
               checked ? ratio_sum / static_cast<double>(checked) : 0.0);
  return 0;
}

int cmd_agreement(const path& judgments_path, const std::vector<std::string>& score_paths,
                  const std::string& criterion_name, const std::string& ac1_path) {
  if (!ac1_path.empty()) {
    const auto counts = read_json(ac1_path).get<std::vector<std::vector<int>>>();
    std::printf("gwet_ac1 %.12f\n", capcheck::gwet_ac1(counts));
    if (score_paths.empty()) return 0;
  }
  const auto criterion = capcheck::parse_criterion(criterion_name);
  if (!criterion) throw capcheck::ConfigError("unknown criterion '" + criterion_name + "'");
  const auto judgments = capcheck::load_judgments(judgments_path);
  std::printf("%-24s %10s %12s %8s %11s\n", "metric", "rate", "tie_fraction", "n_used",
              "human_ties");
  for (const auto& p : score_paths) {
    const auto scores = capcheck::load_score_file(p);
    const auto r = capcheck::agreement_rate(judgments, scores, *criterion);
    std::printf("%-24s %10.6f %12.6f %8zu %11zu\n", scores.metric_id.c_str(), r.rate,
                r.tie_fraction, r.n_used, r.human_ties);
  }
  std::printf("# metric ties count as disagreement; human majority ties are excluded\n");
  return 0;
}

int cmd_serve(const path& state, const std::string& config_path, const std::string& host,
              int port) {
  json j = config_path.empty() ? json::object() : read_json(config_path);
  capcheck::VerifyConfig vc;
  vc.state_dir = state;
  vc.lease_ttl_seconds = j.value("lease_ttl_seconds", vc.lease_ttl_seconds);
  vc.max_attempts = j.value("max_attempts", vc.max_attempts);
  vc.snapshot_every = j.value("snapshot_every", vc.snapshot_every);
  vc.route_render_failures_to_review =
      j.value("route_render_failures_to_review", vc.route_render_failures_to_review);

  capcheck::VerifyBackends b;
  if (j.contains("text_backend")) b.text = capcheck::make_text_backend(j["text_backend"]);
  // Reuse the run-config parser for the sandbox block.
  json run = {{"sandbox", j.value("sandbox", json::object())}};
  const auto rc = capcheck::run_config_from_json(run);
  b.runner = std::make_shared<capcheck::ProcessSandbox>(rc.sandbox);
  b.prompts = std::make_shared<const capcheck::PromptSet>(
      capcheck::load_prompts(j.contains("prompts_dir")
                                 ? path(j["prompts_dir"].get<std::string>())
                                 : capcheck::resource_root() / "prompts",
                             j.value("prompts_version", std::string("v1"))));

  capcheck::VerifyService service(vc, b);
  capcheck::VerifyServer server(service);
  const int bound = server.start(host, port);
  std::printf("listening on http://%s:%d\n", host.c_str(), bound);
  std::fflush(stdout);
  server.wait();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reference-free chart caption evaluation"};
  app.require_subcommand(1);

  path config_path;
  std::string manifest, out, cache;
  int workers = 0;
  auto* evaluate = app.add_subcommand("evaluate", "Reconstruct and score every sample");
  evaluate->add_option("--config", config_path, "Run config (JSON)")->required();
  evaluate->add_option("--manifest", manifest, "Override the manifest");
  evaluate->add_option("--out", out, "Override the output dir");
  evaluate->add_option("--cache", cache, "Override the cache dir");
  evaluate->add_option("--workers", workers, "Override the worker count");

  path run_dir;
  std::vector<std::string> encoders;
  auto* score = app.add_subcommand("score", "Re-score cached reconstructions");
  score->add_option("--run", run_dir, "Previous run dir")->required();
  score->add_option("--encoder,--encoders", encoders, "Encoder spec (JSON or ref-<side>)");
  score->add_option("--out", out, "Output dir (default: the run dir)");

  std::string export_run, export_state, format = "csv";
  bool accepted_only = false;
  auto* exp = app.add_subcommand("export", "Export a run report or verified manifest");
  exp->add_option("--run", export_run, "Run dir");
  exp->add_option("--state", export_state, "Verify service state dir");
  exp->add_option("--format", format, "csv or json");
  exp->add_flag("--accepted-only", accepted_only, "Only accepted items (with --state)");
  exp->add_option("--out", out, "Output file (default: stdout)");

  path schema_manifest;
  std::string type_field = "chart_type";
  auto* schema = app.add_subcommand("schema-check", "Audit caption coverage of the schema");
  schema->add_option("--manifest", schema_manifest, "Manifest")->required();
  schema->add_option("--type-field", type_field, "Field holding the chart type");

  path judgments;
  std::vector<std::string> score_files;
  std::string criterion = "overall", ac1;
  auto* agree = app.add_subcommand("agreement", "Metric/human agreement and Gwet's AC1");
  agree->add_option("--judgments", judgments, "Judgments (line-JSON)");
  agree->add_option("--scores", score_files, "Metric score files");
  agree->add_option("--criterion", criterion, "informativeness, accuracy, ...");
  agree->add_option("--ac1", ac1, "JSON vote-count table for Gwet's AC1");

  path state_dir;
  std::string service_config, host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "Run the verification service");
  serve->add_option("--state", state_dir, "State dir")->required();
  serve->add_option("--config", service_config, "Service config (JSON)");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*evaluate) return cmd_evaluate(config_path, manifest, out, workers, cache);
    if (*score) return cmd_score(run_dir, encoders, out);
    if (*exp) return cmd_export(export_run, export_state, format, accepted_only, out);
    if (*schema) return cmd_schema_check(schema_manifest, type_field);
    if (*agree) {
      if (ac1.empty() && (judgments.empty() || score_files.empty())) {
        throw capcheck::ConfigError("agreement needs --judgments and --scores, or --ac1");
      }
      return cmd_agreement(judgments, score_files, criterion, ac1);
    }
    if (*serve) return cmd_serve(state_dir, service_config, host, port);
  } catch (const capcheck::InfrastructureError& e) {
    std::fprintf(stderr, "infrastructure error: %s\n", e.what());
    return 3;
  } catch (const capcheck::BackendUnavailable& e) {
    std::fprintf(stderr, "backend unavailable: %s\n", e.what());
    return 3;
  } catch (const capcheck::TransportError& e) {
    std::fprintf(stderr, "transport error: %s\n", e.what());
    return 3;
  } catch (const capcheck::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fatal: %s\n", e.what());
    return 1;
  }
  return 0;
}
