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

#include "capcheck/prompts.hpp"

#include "capcheck/error.hpp"

namespace capcheck {
namespace {

bool is_ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_';
}

// Length of a `{ident}` token starting at text[i], or 0.
std::size_t token_length(std::string_view text, std::size_t i) {
  if (text[i] != '{') return 0;
  std::size_t j = i + 1;
  while (j < text.size() && is_ident_char(text[j])) ++j;
  if (j == i + 1 || j >= text.size() || text[j] != '}') return 0;
  return j - i + 1;
}

void check_template(std::string_view name, std::string_view text,
                    const std::set<std::string>& declared) {
  auto found = placeholders(text);
  if (found != declared) {
    std::string msg = "prompt template '" + std::string(name) +
                      "' has placeholders {";
    bool first = true;
    for (const auto& p : found) {
      msg += (first ? "" : ", ") + p;
      first = false;
    }
    msg += "}, expected {";
    first = true;
    for (const auto& p : declared) {
      msg += (first ? "" : ", ") + p;
      first = false;
    }
    throw ValidationError(msg + "}");
  }
}

}  // namespace

std::set<std::string> placeholders(std::string_view text) {
  std::set<std::string> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (std::size_t n = token_length(text, i)) {
      out.emplace(text.substr(i + 1, n - 2));
      i += n - 1;
    }
  }
  return out;
}

std::string substitute(std::string_view tmpl,
                       const std::map<std::string, std::string_view>& values) {
  std::string out;
  out.reserve(tmpl.size());
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (std::size_t n = token_length(tmpl, i)) {
      auto it = values.find(std::string(tmpl.substr(i + 1, n - 2)));
      if (it != values.end()) {
        out.append(it->second);
        i += n - 1;
        continue;
      }
    }
    out.push_back(tmpl[i]);
  }
  return out;
}

void PromptSet::validate() const {
  if (version.empty()) throw ValidationError("prompt set version is empty");
  check_template("regen", regen_template, {"caption"});
  check_template("debug", debug_template, {"code", "error_message"});
  check_template("regen.system", regen_system, {});
  check_template("debug.system", debug_system, {});
}

PromptSet load_prompts(const fs::path& prompts_dir, std::string_view version) {
  const fs::path dir = prompts_dir / std::string(version);
  PromptSet p;
  p.version = std::string(version);
  p.regen_system = read_file(dir / "regen.system.txt");
  p.regen_template = read_file(dir / "regen.user.txt");
  p.debug_system = read_file(dir / "debug.system.txt");
  p.debug_template = read_file(dir / "debug.user.txt");
  p.validate();
  return p;
}

PromptSet default_prompts() {
  return load_prompts(resource_root() / "prompts", "v1");
}

std::string render_regen_prompt(const PromptSet& p, std::string_view caption) {
  return substitute(p.regen_template, {{"caption", caption}});
}

std::string render_debug_prompt(const PromptSet& p, std::string_view code,
                                std::string_view error_message) {
  return substitute(p.debug_template,
                    {{"code", code}, {"error_message", error_message}});
}

}  // namespace capcheck
