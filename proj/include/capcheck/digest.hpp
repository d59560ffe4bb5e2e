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

#ifndef CAPCHECK_DIGEST_HPP_
#define CAPCHECK_DIGEST_HPP_

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>

namespace capcheck {

/// SHA-256 digest rendered as 64 lowercase hex characters.
class Digest {
 public:
  static constexpr std::string_view kAlgorithm = "sha-256";

  Digest() = default;

  /// Throws ValidationError unless `hex` matches [0-9a-f]{64}.
  static Digest FromHex(std::string_view hex);

  const std::string& hex() const { return hex_; }
  std::string_view algorithm() const { return kAlgorithm; }
  bool empty() const { return hex_.empty(); }

  friend bool operator==(const Digest&, const Digest&) = default;
  friend auto operator<=>(const Digest&, const Digest&) = default;

 private:
  explicit Digest(std::string hex) : hex_(std::move(hex)) {}
  friend Digest content_hash(std::span<const std::uint8_t> bytes);

  std::string hex_;
};

Digest content_hash(std::span<const std::uint8_t> bytes);
Digest content_hash(std::string_view bytes);

// Hash of several fields. Each part is length-prefixed so that ("ab","c")
// and ("a","bc") produce different keys.
Digest content_hash_parts(std::initializer_list<std::string_view> parts);

bool is_hex_digest(std::string_view s);

}  // namespace capcheck

#endif  // CAPCHECK_DIGEST_HPP_
