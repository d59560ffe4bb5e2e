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

#include "capcheck/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "capcheck/digest.hpp"
#include "capcheck/error.hpp"
#include "capcheck/process.hpp"

namespace capcheck {

void l2_normalize(std::vector<double>& v) {
  double ss = 0;
  for (double x : v) ss += x * x;
  const double norm = std::sqrt(ss);
  if (!(norm > 1e-12) || !std::isfinite(norm)) {
    std::fill(v.begin(), v.end(), 0.0);
    if (!v.empty()) v[0] = 1.0;
    return;
  }
  for (double& x : v) x /= norm;
}

Embedding ReferenceEncoder::embed(const Image& image) const {
  if (image.width <= 0 || image.height <= 0) {
    throw DecodeError("cannot embed a zero-area image");
  }
  GrayImage g = resize_area(to_gray(image), side_, side_);
  double mean = 0;
  for (double v : g.values) mean += v;
  mean /= static_cast<double>(g.values.size());
  std::vector<double> vec(g.values.size());
  for (std::size_t i = 0; i < vec.size(); ++i) vec[i] = g.values[i] - mean;
  l2_normalize(vec);
  return Embedding{std::move(vec), id()};
}

OnnxEncoder::OnnxEncoder(OnnxEncoderConfig config) : config_(std::move(config)) {
  if (config_.resolution <= 0 || config_.dim <= 0) {
    throw ConfigError("onnx encoder: resolution and dim must be positive");
  }
  if (!fs::is_regular_file(config_.model_path)) {
    throw BackendUnavailable("onnx encoder: model file '" + config_.model_path.string() +
                             "' not found");
  }
  if (config_.command.empty()) {
    config_.command = {"python3", (resource_root() / "tools" / "encode_onnx.py").string()};
  }
  id_ = "onnx:" + content_hash(read_file(config_.model_path)).hex().substr(0, 16);
}

Embedding OnnxEncoder::embed(const Image& image) const {
  TempDir tmp;
  const fs::path img = tmp.path() / "image.png";
  write_file_atomic(img, encode_png(image));
  std::vector<std::string> argv = config_.command;
  argv.insert(argv.end(), {"--model", config_.model_path.string(), "--resolution",
                           std::to_string(config_.resolution), img.string()});
  const std::string out = run_and_capture(argv, 300.0);
  std::vector<double> vec;
  try {
    vec = nlohmann::json::parse(out).get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendUnavailable(std::string("onnx encoder: malformed output: ") + e.what());
  }
  if (static_cast<int>(vec.size()) != config_.dim) {
    throw BackendUnavailable("onnx encoder: expected " + std::to_string(config_.dim) +
                             " values, got " + std::to_string(vec.size()));
  }
  l2_normalize(vec);
  return Embedding{std::move(vec), id_};
}

std::unique_ptr<EmbeddingBackend> make_encoder(const nlohmann::json& config,
                                               const fs::path& base_dir) {
  const std::string type = config.value("type", std::string("reference"));
  if (type == "reference") {
    return std::make_unique<ReferenceEncoder>(config.value("side", 64));
  }
  if (type == "onnx") {
    OnnxEncoderConfig c;
    c.model_path = resolve_local_ref(config.at("model_path").get<std::string>(), base_dir);
    c.resolution = config.at("resolution").get<int>();
    c.dim = config.at("dim").get<int>();
    c.command = config.value("command", std::vector<std::string>{});
    return std::make_unique<OnnxEncoder>(std::move(c));
  }
  throw ConfigError("unknown encoder type '" + type + "'");
}

Embedding embed(std::string_view png_bytes, const EmbeddingBackend& backend) {
  return backend.embed(decode_png(png_bytes));
}

double cosine(const Embedding& a, const Embedding& b) {
  if (a.backend_id != b.backend_id) {
    throw ContractError("cosine: embeddings from different backends ('" + a.backend_id +
                        "' vs '" + b.backend_id + "')");
  }
  if (a.vector.size() != b.vector.size()) {
    throw ContractError("cosine: dimension mismatch");
  }
  double dot = 0;
  for (std::size_t i = 0; i < a.vector.size(); ++i) dot += a.vector[i] * b.vector[i];
  return std::clamp(dot, -1.0, 1.0);
}

double vcs(std::span<const SimilarityRecord> records, bool exclude_failures) {
  if (records.empty()) throw UndefinedAggregate("vcs: no similarity records");
  const std::string& backend = records.front().backend_id;
  std::vector<double> values;
  values.reserve(records.size());
  for (const auto& r : records) {
    if (r.backend_id != backend) {
      throw ContractError("vcs: records mix backends '" + backend + "' and '" +
                          r.backend_id + "'");
    }
    if (exclude_failures && r.failed_reconstruction) continue;
    values.push_back(r.value);
  }
  if (values.empty()) throw UndefinedAggregate("vcs: every sample failed reconstruction");
  // Summing in sorted order makes the result independent of record order.
  std::sort(values.begin(), values.end());
  double sum = 0;
  for (double v : values) sum += v;
  return std::clamp(sum / static_cast<double>(values.size()), values.front(),
                    values.back());
}

}  // namespace capcheck
