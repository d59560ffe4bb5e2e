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

#ifndef CAPCHECK_SIMILARITY_HPP_
#define CAPCHECK_SIMILARITY_HPP_

#include <atomic>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capcheck/image.hpp"
#include "capcheck/io.hpp"
#include "json.hpp"

namespace capcheck {

struct Embedding {
  std::vector<double> vector;  // unit L2 norm
  std::string backend_id;
};

// A vision encoder mapping an image to a unit vector. Loaded backends are
// read-only and may be shared between threads.
class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::string id() const = 0;
  virtual int resolution() const = 0;
  virtual int dim() const = 0;
  virtual Embedding embed(const Image& image) const = 0;
};

// Grayscale, area-resize to side x side, subtract the per-image mean,
// flatten, L2-normalize. A constant image centers to the zero vector and is
// embedded as e1 instead.
class ReferenceEncoder : public EmbeddingBackend {
 public:
  explicit ReferenceEncoder(int side = 64) : side_(side) {}
  std::string id() const override { return "ref-" + std::to_string(side_); }
  int resolution() const override { return side_; }
  int dim() const override { return side_ * side_; }
  Embedding embed(const Image& image) const override;

 private:
  int side_;
};

struct OnnxEncoderConfig {
  fs::path model_path;
  int resolution = 224;
  int dim = 0;
  // Helper invoked as: <command...> --model <path> --resolution <n> <image>;
  // must print a JSON array of `dim` numbers.
  std::vector<std::string> command;
};

// Neural encoder from a local ONNX model file, run out of process. The
// backend id embeds the model digest: "onnx:<first 16 hex>".
class OnnxEncoder : public EmbeddingBackend {
 public:
  // Throws BackendUnavailable if the model file is missing.
  explicit OnnxEncoder(OnnxEncoderConfig config);
  std::string id() const override { return id_; }
  int resolution() const override { return config_.resolution; }
  int dim() const override { return config_.dim; }
  Embedding embed(const Image& image) const override;

 private:
  OnnxEncoderConfig config_;
  std::string id_;
};

// {"type": "reference", "side": 64} or
// {"type": "onnx", "model_path": ..., "resolution": ..., "dim": ..., "command": [...]}
std::unique_ptr<EmbeddingBackend> make_encoder(const nlohmann::json& config,
                                               const fs::path& base_dir = {});

// Normalizes in place; zero vectors become e1.
void l2_normalize(std::vector<double>& v);

Embedding embed(std::string_view png_bytes, const EmbeddingBackend& backend);

// Dot product of two unit vectors, clamped to [-1, 1]. Throws ContractError
// on backend or dimension mismatch.
double cosine(const Embedding& a, const Embedding& b);

struct SimilarityRecord {
  std::string sample_id;
  std::string backend_id;
  double value = 0;
  bool failed_reconstruction = false;
};

// Mean of record values for one backend. With exclude_failures, failed
// reconstructions are dropped instead of counting as 0. Throws
// UndefinedAggregate when nothing remains, ContractError on mixed backends.
double vcs(std::span<const SimilarityRecord> records, bool exclude_failures = false);

}  // namespace capcheck

#endif  // CAPCHECK_SIMILARITY_HPP_
