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

#include "capcheck/sandbox.hpp"

#include <array>
#include <cctype>
#include <cstdlib>
#include <regex>
#include <set>
#include <sstream>

#include "capcheck/error.hpp"
#include "capcheck/process.hpp"

namespace capcheck {
namespace {

constexpr std::size_t kStderrTailBytes = 4096;

// Injected around the generated script. The script runs via exec() so its
// traceback line numbers refer to script.py; figures are saved afterwards,
// recording the text artists drawn on each one.
constexpr std::string_view kRunner = R"PY(import json
import sys
import traceback

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import matplotlib.text

DPI = int(sys.argv[1])
plt.rcParams["figure.dpi"] = DPI
plt.rcParams["savefig.dpi"] = DPI
plt.show = lambda *args, **kwargs: None
sys.argv = ["script.py"]

namespace = {"__name__": "__main__", "__file__": "script.py"}
try:
    with open("script.py", encoding="utf-8") as f:
        source = f.read()
    exec(compile(source, "script.py", "exec"), namespace)
except SystemExit as e:
    if e.code not in (None, 0):
        print(f"SystemExit: {e.code}", file=sys.stderr)
        sys.exit(1)
except BaseException as e:
    traceback.print_exception(type(e), e, e.__traceback__.tb_next)
    sys.exit(1)

drawn = []
_draw = matplotlib.text.Text.draw


def _recording_draw(self, renderer):
    if self.get_visible():
        s = self.get_text()
        if s and s.strip():
            drawn.append(s)
    return _draw(self, renderer)


matplotlib.text.Text.draw = _recording_draw
figures = []
for index, num in enumerate(plt.get_fignums()):
    fig = plt.figure(num)
    drawn.clear()
    fig.canvas.draw()
    texts = list(drawn)
    fig.savefig(
        f"figure-{index}.png",
        format="png",
        metadata={"Software": None, "capcheck:text": json.dumps(texts)},
    )
    width, height = fig.canvas.get_width_height()
    figures.append({"num": num, "width": width, "height": height, "texts": texts})
with open("figures.json", "w", encoding="utf-8") as f:
    json.dump({"figures": figures}, f)
)PY";

const std::set<std::string, std::less<>> kDeniedModules = {
    "os",       "subprocess", "socket", "shutil",   "ctypes",  "multiprocessing",
    "pty",      "requests",   "urllib", "urllib3",  "http",    "ftplib",
    "smtplib",  "telnetlib",  "asyncio", "signal",  "pathlib", "tempfile",
    "glob",     "importlib",  "webbrowser", "threading", "pickle", "marshal",
};

struct PatternRule {
  const char* name;
  std::regex re;
};

const std::vector<PatternRule>& pattern_rules() {
  static const std::vector<PatternRule> rules = [] {
    std::vector<PatternRule> r;
    auto add = [&](const char* name, const char* pattern) {
      r.push_back({name, std::regex(pattern, std::regex::ECMAScript)});
    };
    add("dynamic-import", R"(\b__import__\s*\()");
    add("dynamic-exec", R"((^|[^.\w])(eval|exec)\s*\()");
    add("introspection-escape", R"(__(builtins|subclasses|globals|code)__)");
    add("breakpoint", R"(\bbreakpoint\s*\()");
    add("absolute-or-parent-path-write",
        R"(\b(open|savefig|imsave|to_csv|write_text|write_bytes)\s*\(\s*[rbfuRBFU]*['"](/|\.\.|~))");
    return r;
  }();
  return rules;
}

std::string module_root(std::string_view name) {
  auto is_space = [](char c) { return c == ' ' || c == '\t'; };
  while (!name.empty() && is_space(name.front())) name.remove_prefix(1);
  std::size_t end = 0;
  while (end < name.size() && (std::isalnum(static_cast<unsigned char>(name[end])) ||
                               name[end] == '_')) {
    ++end;
  }
  return std::string(name.substr(0, end));
}

std::vector<std::string> minimal_env(const fs::path& workdir) {
  const std::string w = workdir.string();
  return {
      "PATH=/usr/local/bin:/usr/bin:/bin",
      "HOME=" + w,
      "TMPDIR=" + w + "/tmp",
      "MPLCONFIGDIR=" + w + "/.mplconfig",
      "MPLBACKEND=Agg",
      "LANG=C.UTF-8",
      "LC_ALL=C.UTF-8",
      "PYTHONHASHSEED=0",
      "PYTHONDONTWRITEBYTECODE=1",
      "PYTHONIOENCODING=utf-8",
      "SOURCE_DATE_EPOCH=0",
      "OPENBLAS_NUM_THREADS=1",
      "OMP_NUM_THREADS=1",
      "MKL_NUM_THREADS=1",
  };
}

std::string trim_copy(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string_view to_string(RenderStatus s) {
  switch (s) {
    case RenderStatus::kSuccess: return "success";
    case RenderStatus::kRuntimeError: return "runtime_error";
    case RenderStatus::kTimeout: return "timeout";
    case RenderStatus::kNoFigure: return "no_figure";
    case RenderStatus::kUnsafeRejected: return "unsafe_rejected";
  }
  return "runtime_error";
}

RenderStatus parse_render_status(std::string_view s) {
  for (auto st : {RenderStatus::kSuccess, RenderStatus::kRuntimeError,
                  RenderStatus::kTimeout, RenderStatus::kNoFigure,
                  RenderStatus::kUnsafeRejected}) {
    if (to_string(st) == s) return st;
  }
  throw ParseError("unknown render status '" + std::string(s) + "'");
}

nlohmann::json SandboxConfig::fingerprint() const {
  return {
      {"interpreter", interpreter},
      {"wall_timeout_seconds", limits.wall_timeout_seconds},
      {"memory_cap_bytes", limits.memory_cap_bytes},
      {"deny_network", limits.deny_network},
      {"dpi", limits.dpi},
      {"runner", content_hash(kRunner).hex()},
  };
}

Digest SandboxConfig::digest() const { return content_hash(fingerprint().dump()); }

std::string RenderOutcome::error_message() const {
  switch (status) {
    case RenderStatus::kSuccess:
      return {};
    case RenderStatus::kRuntimeError:
      return stderr_tail;
    case RenderStatus::kTimeout:
      return "TimeoutError: the code did not finish within the execution time limit.";
    case RenderStatus::kNoFigure:
      return "The code ran without errors but did not create any Matplotlib figure.";
    case RenderStatus::kUnsafeRejected:
      return "The code was rejected because it uses a forbidden operation (" +
             detail + "). Use only Matplotlib and NumPy to draw the chart.";
  }
  return {};
}

nlohmann::json to_json(const RenderOutcome& o, bool include_image_digest) {
  nlohmann::json j = {
      {"status", std::string(to_string(o.status))},
      {"stderr_tail", o.stderr_tail},
      {"detail", o.detail},
      {"figure_count", o.figure_count},
      {"width", o.width},
      {"height", o.height},
      {"figure_texts", o.figure_texts},
      {"network_mechanism", o.network_mechanism},
  };
  if (include_image_digest && !o.image_png.empty()) {
    j["image_digest"] = content_hash(o.image_png).hex();
  }
  return j;
}

std::optional<std::string> prescreen(std::string_view code) {
  static const std::regex import_re(R"(^\s*import\s+([^#]+))");
  static const std::regex from_re(R"(^\s*from\s+([\w.]+)\s+import\b)");
  std::istringstream lines{std::string(code)};
  std::string line;
  while (std::getline(lines, line)) {
    std::smatch m;
    if (std::regex_search(line, m, import_re)) {
      std::string names = m[1].str();
      std::size_t start = 0;
      while (start <= names.size()) {
        std::size_t end = names.find(',', start);
        if (end == std::string::npos) end = names.size();
        std::string root = module_root(std::string_view(names).substr(start, end - start));
        if (kDeniedModules.contains(root)) return "import:" + root;
        start = end + 1;
      }
    } else if (std::regex_search(line, m, from_re)) {
      std::string root = module_root(m[1].str());
      if (kDeniedModules.contains(root)) return "import:" + root;
    }
  }
  const std::string text(code);
  for (const auto& rule : pattern_rules()) {
    if (std::regex_search(text, rule.re)) return rule.name;
  }
  return std::nullopt;
}

RenderOutcome execute(std::string_view code, const SandboxConfig& config) {
  RenderOutcome out;
  out.network_mechanism = "prescreen";
  if (trim_copy(code).empty()) {
    throw ContractError("sandbox: code must be non-empty");
  }
  if (config.limits.wall_timeout_seconds <= 0) {
    throw ContractError("sandbox: wall_timeout must be positive");
  }
  if (auto rule = prescreen(code)) {
    out.status = RenderStatus::kUnsafeRejected;
    out.detail = *rule;
    return out;
  }

  TempDir workdir(config.temp_root, "capcheck-run-");
  if (config.limits.retain_workdir) workdir.keep();
  const fs::path& w = workdir.path();
  fs::create_directories(w / "tmp");
  write_file_atomic(w / "script.py", code);
  write_file_atomic(w / "runner.py", kRunner);

  ProcessSpec spec;
  spec.argv = {config.interpreter, "-B", "runner.py",
               std::to_string(config.limits.dpi)};
  spec.env = minimal_env(w);
  spec.cwd = w;
  spec.stdout_path = w / "stdout.txt";
  spec.stderr_path = w / "stderr.txt";
  spec.timeout_seconds = config.limits.wall_timeout_seconds;
  spec.address_space_limit = config.limits.memory_cap_bytes;
  spec.isolate_network = config.limits.deny_network;

  ProcessResult r = run_process(spec);
  if (!r.started) {
    throw InfrastructureError("sandbox unavailable: " + r.spawn_error);
  }
  out.duration_seconds = r.duration_seconds;
  if (r.network_isolated) out.network_mechanism = "netns";
  out.stderr_tail = read_tail(spec.stderr_path, kStderrTailBytes);

  if (r.timed_out) {
    out.status = RenderStatus::kTimeout;
    return out;
  }
  if (r.exit_code != 0) {
    out.status = RenderStatus::kRuntimeError;
    if (trim_copy(out.stderr_tail).empty()) {
      out.stderr_tail = r.term_signal
                            ? "process killed by signal " + std::to_string(r.term_signal)
                            : "process exited with status " + std::to_string(r.exit_code);
    }
    return out;
  }

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(w / "figures.json"));
  } catch (const std::exception& e) {
    out.status = RenderStatus::kRuntimeError;
    out.stderr_tail += std::string("\nfigure capture failed: ") + e.what();
    return out;
  }
  const auto& figures = meta.at("figures");
  out.figure_count = static_cast<int>(figures.size());
  if (figures.empty()) {
    out.status = RenderStatus::kNoFigure;
    return out;
  }
  const std::size_t last = figures.size() - 1;
  const auto& fig = figures[last];
  out.width = fig.at("width").get<int>();
  out.height = fig.at("height").get<int>();
  out.figure_texts = fig.at("texts").get<std::vector<std::string>>();
  out.image_png = read_file(w / ("figure-" + std::to_string(last) + ".png"));
  out.status = out.image_png.empty() ? RenderStatus::kNoFigure : RenderStatus::kSuccess;
  return out;
}

ProcessSandbox::ProcessSandbox(SandboxConfig config) : config_(std::move(config)) {
  if (config_.limits.wall_timeout_seconds <= 0) {
    throw ConfigError("sandbox wall_timeout must be positive");
  }
}

RenderOutcome ProcessSandbox::run(std::string_view code) {
  ++executions_;
  return execute(code, config_);
}

}  // namespace capcheck
