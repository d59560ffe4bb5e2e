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

#ifndef CAPCHECK_PROMPTS_HPP_
#define CAPCHECK_PROMPTS_HPP_

#include <map>
#include <set>
#include <string>
#include <string_view>

#include "capcheck/io.hpp"

namespace capcheck {

// The chart-regeneration and code-debugging prompts. Templates are shipped
// as data files under prompts/<version>/ and loaded unchanged.
struct PromptSet {
  std::string version;
  std::string regen_system;
  std::string regen_template;  // {caption}
  std::string debug_system;
  std::string debug_template;  // {code}, {error_message}

  // Throws ValidationError if a template's placeholder set differs from the
  // declared one, a system text carries any placeholder, or version is empty.
  void validate() const;
};

// Loads prompts/<version>/{regen,debug}.{system,user}.txt under `root`.
PromptSet load_prompts(const fs::path& prompts_dir, std::string_view version);

// The shipped templates, from resource_root()/prompts.
PromptSet default_prompts();

// Names of `{identifier}` tokens appearing in `text`.
std::set<std::string> placeholders(std::string_view text);

// Single left-to-right pass; substituted values are never rescanned, so a
// caption that itself contains "{code}" is inserted literally.
std::string substitute(std::string_view tmpl,
                       const std::map<std::string, std::string_view>& values);

std::string render_regen_prompt(const PromptSet& p, std::string_view caption);
std::string render_debug_prompt(const PromptSet& p, std::string_view code,
                                std::string_view error_message);

}  // namespace capcheck

#endif  // CAPCHECK_PROMPTS_HPP_
