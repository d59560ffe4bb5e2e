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

#include "capcheck/reconstructor.hpp"

#include <chrono>

#include "capcheck/error.hpp"

namespace capcheck {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string complete_code(TextBackend& backend, TextRequest request) {
  std::string code = strip_code_fences(backend.complete(request));
  if (code.empty()) throw GenerationError("text backend returned no code");
  return code;
}

}  // namespace

std::string strip_code_fences(std::string_view response) {
  constexpr std::string_view kFence = "```";
  const auto open = response.find(kFence);
  if (open == std::string_view::npos) return std::string(trim(response));
  // The opening fence line may carry a language tag ("```python").
  auto body_start = response.find('\n', open);
  if (body_start == std::string_view::npos) return {};
  ++body_start;
  auto close = response.find(kFence, body_start);
  std::string_view body = close == std::string_view::npos
                              ? response.substr(body_start)
                              : response.substr(body_start, close - body_start);
  return std::string(trim(body));
}

std::string generate_code(std::string_view caption, TextBackend& backend,
                          const PromptSet& prompts, const GenerationOptions& opts) {
  if (trim(caption).empty()) throw ContractError("generate_code: caption is empty");
  return complete_code(backend, TextRequest{render_regen_prompt(prompts, caption),
                                            prompts.regen_system,
                                            opts.max_output_tokens});
}

std::string repair_code(std::string_view code, std::string_view error_message,
                        TextBackend& backend, const PromptSet& prompts,
                        const GenerationOptions& opts) {
  if (trim(error_message).empty()) {
    throw ContractError("repair_code: error_message is empty");
  }
  return complete_code(backend,
                       TextRequest{render_debug_prompt(prompts, code, error_message),
                                   prompts.debug_system, opts.max_output_tokens});
}

std::string image_ref_for(std::string_view png) {
  return "sha256:" + content_hash(png).hex();
}

nlohmann::json to_json(const Reconstruction& r) {
  nlohmann::json attempts = nlohmann::json::array();
  for (const auto& a : r.attempts) {
    attempts.push_back({
        {"index", a.index},
        {"code", a.code},
        {"outcome", std::string(to_string(a.outcome))},
        {"message", a.message},
        {"duration_seconds", a.duration_seconds},
    });
  }
  nlohmann::json j = {
      {"sample_id", r.sample_id},
      {"attempts", attempts},
      {"final_code", r.final_code},
      {"status", r.succeeded() ? "succeeded" : "failed"},
      {"figure_texts", r.figure_texts},
  };
  j["rendered_image_ref"] =
      r.rendered_image_ref ? nlohmann::json(*r.rendered_image_ref) : nlohmann::json();
  return j;
}

Reconstruction reconstruction_from_json(const nlohmann::json& j) {
  Reconstruction r;
  r.sample_id = j.at("sample_id").get<std::string>();
  for (const auto& a : j.at("attempts")) {
    r.attempts.push_back({
        a.at("index").get<int>(),
        a.at("code").get<std::string>(),
        parse_render_status(a.at("outcome").get<std::string>()),
        a.at("message").get<std::string>(),
        a.at("duration_seconds").get<double>(),
    });
  }
  r.final_code = j.at("final_code").get<std::string>();
  r.status = j.at("status").get<std::string>() == "succeeded"
                 ? ReconstructionStatus::kSucceeded
                 : ReconstructionStatus::kFailed;
  if (const auto& ref = j.at("rendered_image_ref"); !ref.is_null()) {
    r.rendered_image_ref = ref.get<std::string>();
  }
  r.figure_texts = j.value("figure_texts", std::vector<std::string>{});
  return r;
}

Reconstruction reconstruct(const ChartSample& sample, TextBackend& backend,
                           CodeRunner& sandbox, const PromptSet& prompts,
                           int max_attempts, const GenerationOptions& opts) {
  if (max_attempts < 1) throw ContractError("reconstruct: max_attempts must be >= 1");

  Reconstruction rec;
  rec.sample_id = sample.id;
  std::string prev_code;
  std::string prev_error;
  for (int k = 1; k <= max_attempts; ++k) {
    const auto start = std::chrono::steady_clock::now();
    ReconstructionAttempt attempt;
    attempt.index = k;
    try {
      attempt.code = prev_code.empty()
                         ? generate_code(sample.caption, backend, prompts, opts)
                         : repair_code(prev_code, prev_error, backend, prompts, opts);
    } catch (const TransportError& e) {
      throw InfrastructureError("sample '" + sample.id +
                                "': text backend unavailable: " + e.what());
    } catch (const GenerationError& e) {
      attempt.outcome = RenderStatus::kRuntimeError;
      attempt.message = e.what();
    }

    RenderOutcome outcome;
    if (!attempt.code.empty()) {
      outcome = sandbox.run(attempt.code);
      attempt.outcome = outcome.status;
      attempt.message = outcome.error_message();
    }
    attempt.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    prev_code = attempt.code;
    prev_error = attempt.message;
    rec.final_code = attempt.code;
    rec.attempts.push_back(std::move(attempt));

    if (outcome.status == RenderStatus::kSuccess && !outcome.image_png.empty()) {
      rec.status = ReconstructionStatus::kSucceeded;
      rec.rendered_image_ref = image_ref_for(outcome.image_png);
      rec.image_png = std::move(outcome.image_png);
      rec.figure_texts = std::move(outcome.figure_texts);
      break;
    }
  }
  return rec;
}

}  // namespace capcheck
