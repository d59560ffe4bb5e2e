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

#include "capcheck/cache.hpp"

#include <algorithm>

#include "capcheck/error.hpp"

namespace capcheck {

Cache::Cache(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw IoError("cannot create cache root '" + root_.string() + "': " + ec.message());
}

fs::path Cache::entry_path(std::string_view ns, const Digest& key) const {
  const std::string& hex = key.hex();
  return root_ / std::string(ns) / hex.substr(0, 2) / hex;
}

std::optional<std::string> Cache::get(std::string_view ns, const Digest& key) const {
  const fs::path p = entry_path(ns, key);
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) return std::nullopt;
  return read_file(p);
}

void Cache::put(std::string_view ns, const Digest& key, std::string_view bytes) const {
  write_file_atomic(entry_path(ns, key), bytes);
}

Digest Cache::put_blob(std::string_view bytes) const {
  const Digest d = content_hash(bytes);
  if (!has_blob(d)) put("blob", d, bytes);
  return d;
}

std::string Cache::get_blob(const Digest& digest) const {
  return read_file(entry_path("blob", digest));
}

bool Cache::has_blob(const Digest& digest) const {
  std::error_code ec;
  return fs::is_regular_file(entry_path("blob", digest), ec);
}

void CallAudit::record(Kind kind, std::string_view detail) {
  counts_[kind].fetch_add(1);
  std::lock_guard lock(mu_);
  lines_.push_back(std::string(name(kind)) + " " + std::string(detail));
}

std::size_t CallAudit::total() const {
  std::size_t n = 0;
  for (const auto& c : counts_) n += c.load();
  return n;
}

std::vector<std::string> CallAudit::lines() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out = lines_;
  std::sort(out.begin(), out.end());
  return out;
}

std::string_view CallAudit::name(Kind kind) {
  switch (kind) {
    case kTextGeneration: return "text_generation";
    case kSandbox: return "sandbox";
    case kEncoder: return "encoder";
    case kOcr: return "ocr";
    case kKindCount: break;
  }
  return "unknown";
}

}  // namespace capcheck
