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

#ifndef CAPCHECK_CACHE_HPP_
#define CAPCHECK_CACHE_HPP_

#include <atomic>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "capcheck/digest.hpp"
#include "capcheck/io.hpp"

namespace capcheck {

// Content-addressed on-disk store. Entries live at
// <root>/<namespace>/<first two hex>/<key>; blobs (PNG bytes) are keyed by
// their own digest under the "blob" namespace. Writes go through an atomic
// rename, so concurrent workers writing the same key are harmless.
class Cache {
 public:
  explicit Cache(fs::path root);

  const fs::path& root() const { return root_; }

  std::optional<std::string> get(std::string_view ns, const Digest& key) const;
  void put(std::string_view ns, const Digest& key, std::string_view bytes) const;

  Digest put_blob(std::string_view bytes) const;
  // Throws IoError if absent.
  std::string get_blob(const Digest& digest) const;
  bool has_blob(const Digest& digest) const;

 private:
  fs::path entry_path(std::string_view ns, const Digest& key) const;
  fs::path root_;
};

// Counts calls that reached a real backend (cache misses). One line per
// call is recorded for cache_audit.log.
class CallAudit {
 public:
  enum Kind { kTextGeneration, kSandbox, kEncoder, kOcr, kKindCount };

  void record(Kind kind, std::string_view detail);
  std::size_t count(Kind kind) const { return counts_[kind].load(); }
  std::size_t total() const;
  // Sorted, so the log does not depend on worker scheduling.
  std::vector<std::string> lines() const;

  static std::string_view name(Kind kind);

 private:
  std::atomic<std::size_t> counts_[kKindCount] = {};
  mutable std::mutex mu_;
  std::vector<std::string> lines_;
};

}  // namespace capcheck

#endif  // CAPCHECK_CACHE_HPP_
