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

#include "capcheck/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

#include "capcheck/error.hpp"

namespace capcheck {
namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

}  // namespace

bool is_hex_digest(std::string_view s) {
  if (s.size() != 64) return false;
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

Digest Digest::FromHex(std::string_view hex) {
  if (!is_hex_digest(hex)) {
    throw ValidationError("not a sha-256 hex digest: '" + std::string(hex) + "'");
  }
  return Digest(std::string(hex));
}

Digest content_hash(std::span<const std::uint8_t> bytes) {
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1 || len != 32) {
    throw Error("sha-256 computation failed");
  }
  std::string hex;
  hex.reserve(64);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHexDigits[md[i] >> 4]);
    hex.push_back(kHexDigits[md[i] & 0xf]);
  }
  return Digest(std::move(hex));
}

Digest content_hash(std::string_view bytes) {
  return content_hash(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

Digest content_hash_parts(std::initializer_list<std::string_view> parts) {
  std::string buf;
  for (std::string_view p : parts) {
    buf += std::to_string(p.size());
    buf.push_back(':');
    buf.append(p);
    buf.push_back(';');
  }
  return content_hash(buf);
}

}  // namespace capcheck
