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

#ifndef CAPCHECK_SANDBOX_HPP_
#define CAPCHECK_SANDBOX_HPP_

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capcheck/digest.hpp"
#include "capcheck/io.hpp"
#include "json.hpp"

namespace capcheck {

enum class RenderStatus {
  kSuccess,
  kRuntimeError,
  kTimeout,
  kNoFigure,
  kUnsafeRejected,
};

std::string_view to_string(RenderStatus s);
RenderStatus parse_render_status(std::string_view s);

struct SandboxLimits {
  double wall_timeout_seconds = 60.0;
  std::uint64_t memory_cap_bytes = std::uint64_t{1} << 30;
  bool deny_network = true;
  // Keep each execution's workdir instead of deleting it (debugging aid).
  bool retain_workdir = false;
  int dpi = 100;
};

struct SandboxConfig {
  std::string interpreter = "python3";
  fs::path temp_root;  // parent of per-execution workdirs; system temp if empty
  SandboxLimits limits;

  // Everything that can change a rendered image; retain_workdir and
  // temp_root are excluded.
  nlohmann::json fingerprint() const;
  Digest digest() const;
};

struct RenderOutcome {
  RenderStatus status = RenderStatus::kRuntimeError;
  std::string image_png;    // non-empty iff status == kSuccess
  std::string stderr_tail;  // last 4 KiB of the child's stderr
  std::string detail;       // rule name for kUnsafeRejected
  double duration_seconds = 0;
  int figure_count = 0;
  int width = 0;
  int height = 0;
  // Text drawn on the selected figure, in draw order. Also embedded in the
  // PNG as a "capcheck:text" tEXt chunk.
  std::vector<std::string> figure_texts;
  // "netns" when the child ran in an empty network namespace, otherwise
  // "prescreen".
  std::string network_mechanism;

  // Message handed to the repair prompt for a failed attempt.
  std::string error_message() const;
};

nlohmann::json to_json(const RenderOutcome& o, bool include_image_digest = true);

// Deny-list scan for process spawning, networking, dynamic code execution and
// filesystem escapes. Best effort only: the process boundary is what actually
// contains the script. Returns the violated rule, if any.
std::optional<std::string> prescreen(std::string_view code);

// Runs `code` in a child interpreter with a headless-backend prologue and a
// save-every-figure epilogue injected; returns the last-created figure.
RenderOutcome execute(std::string_view code, const SandboxConfig& config);

// Something that turns plotting code into a RenderOutcome. Lets the
// reconstruction loop run against the real sandbox, a cache, or a fake.
class CodeRunner {
 public:
  virtual ~CodeRunner() = default;
  virtual RenderOutcome run(std::string_view code) = 0;
  // Identifies the execution environment for cache keys.
  virtual std::string fingerprint() const = 0;
};

class ProcessSandbox : public CodeRunner {
 public:
  explicit ProcessSandbox(SandboxConfig config);

  // Throws InfrastructureError when the interpreter cannot be started.
  RenderOutcome run(std::string_view code) override;
  std::string fingerprint() const override { return config_.digest().hex(); }

  const SandboxConfig& config() const { return config_; }
  std::size_t executions() const { return executions_.load(); }

 private:
  SandboxConfig config_;
  std::atomic<std::size_t> executions_{0};
};

}  // namespace capcheck

#endif  // CAPCHECK_SANDBOX_HPP_
