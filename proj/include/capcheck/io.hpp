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

#ifndef CAPCHECK_IO_HPP_
#define CAPCHECK_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>

namespace capcheck {

namespace fs = std::filesystem;

// Throws IoError when the file cannot be read.
std::string read_file(const fs::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written file. Creates parent directories.
void write_file_atomic(const fs::path& path, std::string_view bytes);

// Accepts plain paths and file:// URIs; anything else is rejected.
fs::path resolve_local_ref(std::string_view ref, const fs::path& base_dir);

// Directory holding the shipped prompts/ and data/ trees. Honors
// CAPCHECK_HOME, falling back to the source tree the library was built from.
fs::path resource_root();

}  // namespace capcheck

#endif  // CAPCHECK_IO_HPP_
