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

#ifndef CAPCHECK_PROCESS_HPP_
#define CAPCHECK_PROCESS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "capcheck/io.hpp"

namespace capcheck {

struct ProcessSpec {
  std::vector<std::string> argv;  // argv[0] is resolved against PATH
  std::vector<std::string> env;   // full child environment, "KEY=VALUE"
  fs::path cwd;
  fs::path stdout_path;  // empty: /dev/null
  fs::path stderr_path;  // empty: /dev/null
  double timeout_seconds = 0;  // 0: wait forever
  std::optional<std::uint64_t> address_space_limit;
  // Move the child into a fresh network namespace (no interfaces but lo).
  bool isolate_network = false;
};

struct ProcessResult {
  bool started = false;
  std::string spawn_error;  // set when !started
  int exit_code = -1;       // valid when the child exited normally
  int term_signal = 0;      // nonzero when killed by a signal
  bool timed_out = false;
  bool network_isolated = false;
  double duration_seconds = 0;
};

// Runs the child in its own process group; on timeout the whole group is
// killed with SIGKILL.
ProcessResult run_process(const ProcessSpec& spec);

// Last `max_bytes` of a file ("" if unreadable).
std::string read_tail(const fs::path& path, std::size_t max_bytes);

// Fresh, uniquely named directory under `parent` (system temp if empty).
fs::path make_temp_dir(const fs::path& parent, std::string_view prefix);

// RAII owner of a temp directory; removes it unless released.
class TempDir {
 public:
  explicit TempDir(const fs::path& parent = {}, std::string_view prefix = "capcheck-");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  void keep() { keep_ = true; }

 private:
  fs::path path_;
  bool keep_ = false;
};

// Runs `argv` with the caller's PATH and captures stdout. Throws
// BackendUnavailable if it cannot start or exits nonzero.
std::string run_and_capture(const std::vector<std::string>& argv,
                            double timeout_seconds);

}  // namespace capcheck

#endif  // CAPCHECK_PROCESS_HPP_
