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

#include "capcheck/io.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "capcheck/error.hpp"

namespace capcheck {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return std::move(ss).str();
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  static std::atomic<unsigned long> counter{0};
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create directory '" + path.parent_path().string() +
                    "': " + ec.message());
    }
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw IoError("error writing '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into '" + path.string() + "'");
  }
}

fs::path resolve_local_ref(std::string_view ref, const fs::path& base_dir) {
  constexpr std::string_view kFileScheme = "file://";
  std::string_view p = ref;
  if (p.starts_with(kFileScheme)) {
    p.remove_prefix(kFileScheme.size());
  } else if (p.find("://") != std::string_view::npos) {
    throw ValidationError("only local paths and file:// URIs are supported: '" +
                          std::string(ref) + "'");
  }
  fs::path path{std::string(p)};
  if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
  return path;
}

fs::path resource_root() {
  if (const char* env = std::getenv("CAPCHECK_HOME"); env && *env) {
    return fs::path(env);
  }
#ifdef CAPCHECK_SOURCE_DIR
  return fs::path(CAPCHECK_SOURCE_DIR);
#else
  return fs::current_path();
#endif
}

}  // namespace capcheck
