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

#ifndef CAPCHECK_RECONSTRUCTOR_HPP_
#define CAPCHECK_RECONSTRUCTOR_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capcheck/prompts.hpp"
#include "capcheck/sample.hpp"
#include "capcheck/sandbox.hpp"
#include "capcheck/text_backend.hpp"

namespace capcheck {

// Caption -> plotting code -> rendered chart, with a bounded
// execute/debug loop.

struct GenerationOptions {
  int max_output_tokens = 4096;
};

// Contents of the first fenced block if the response has one, otherwise the
// whole response; surrounding whitespace trimmed.
std::string strip_code_fences(std::string_view response);

// Throws TransportError (retryable) or GenerationError (empty result).
std::string generate_code(std::string_view caption, TextBackend& backend,
                          const PromptSet& prompts,
                          const GenerationOptions& opts = {});

std::string repair_code(std::string_view code, std::string_view error_message,
                        TextBackend& backend, const PromptSet& prompts,
                        const GenerationOptions& opts = {});

struct ReconstructionAttempt {
  int index = 0;  // 1-based
  std::string code;
  RenderStatus outcome = RenderStatus::kRuntimeError;
  std::string message;  // error text for failed outcomes
  double duration_seconds = 0;
};

enum class ReconstructionStatus { kSucceeded, kFailed };

struct Reconstruction {
  std::string sample_id;
  std::vector<ReconstructionAttempt> attempts;
  std::string final_code;
  // "sha256:<hex>" of the rendered PNG; present iff succeeded.
  std::optional<std::string> rendered_image_ref;
  ReconstructionStatus status = ReconstructionStatus::kFailed;

  // Not serialized; filled from the sandbox or the image store.
  std::string image_png;
  std::vector<std::string> figure_texts;

  bool succeeded() const { return status == ReconstructionStatus::kSucceeded; }
};

nlohmann::json to_json(const Reconstruction& r);
Reconstruction reconstruction_from_json(const nlohmann::json& j);

std::string image_ref_for(std::string_view png);

/// Attempt 1 generates code from the caption; each later attempt asks the
/// backend to repair the previous code given its error. Stops at the first
/// successful render or after `max_attempts`.
///
/// Transport failures surviving the backend's own retries and an unusable
/// sandbox raise InfrastructureError. An empty model response counts as a
/// failed attempt; the next attempt regenerates from the caption.
Reconstruction reconstruct(const ChartSample& sample, TextBackend& backend,
                           CodeRunner& sandbox, const PromptSet& prompts,
                           int max_attempts, const GenerationOptions& opts = {});

}  // namespace capcheck

#endif  // CAPCHECK_RECONSTRUCTOR_HPP_
