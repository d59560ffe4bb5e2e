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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "capcheck/error.hpp"
#include "capcheck/similarity.hpp"
#include "test_util.hpp"

namespace capcheck {
namespace {

using testing::invert;
using testing::synthetic_chart;
using testing::white_noise;

double sim(const Image& a, const Image& b, const EmbeddingBackend& e) {
  return cosine(e.embed(a), e.embed(b));
}

TEST(ReferenceEncoderTest, EmbeddingsAreUnitNorm) {
  ReferenceEncoder enc;
  EXPECT_EQ(enc.id(), "ref-64");
  EXPECT_EQ(enc.dim(), 4096);
  const auto e = enc.embed(synthetic_chart(1));
  double ss = 0;
  for (double v : e.vector) ss += v * v;
  EXPECT_NEAR(ss, 1.0, 1e-12);
}

TEST(ReferenceEncoderTest, IdentityAndInversion) {
  ReferenceEncoder enc;
  for (std::uint32_t seed = 0; seed < 10; ++seed) {
    const Image img = synthetic_chart(seed);
    EXPECT_NEAR(sim(img, img, enc), 1.0, 1e-9);
    EXPECT_NEAR(sim(img, invert(img), enc), -1.0, 1e-9);
  }
}

TEST(ReferenceEncoderTest, ConstantImageMapsToFirstBasisVector) {
  ReferenceEncoder enc(8);
  const auto e = enc.embed(Image(30, 20));
  ASSERT_EQ(e.vector.size(), 64u);
  EXPECT_EQ(e.vector[0], 1.0);
  EXPECT_TRUE(std::all_of(e.vector.begin() + 1, e.vector.end(), [](double v) { return v == 0.0; }));
}

TEST(ReferenceEncoderTest, NoiseIsFartherThanASimilarChart) {
  ReferenceEncoder enc;
  const Image a = synthetic_chart(4);
  Image nudged = a;
  for (int x = 0; x < 10; ++x) nudged.pixel(x, 0)[0] = 0;
  const double near = sim(a, nudged, enc);
  const double far = sim(a, white_noise(9, a.width, a.height), enc);
  EXPECT_GT(near, 0.99);
  EXPECT_LT(std::abs(far), 0.2);
}

TEST(ReferenceEncoderTest, SizeInvariantForScaledCopies) {
  ReferenceEncoder enc(16);
  const Image small = synthetic_chart(2, 64, 64);
  Image big(128, 128);
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x) std::copy_n(small.pixel(x / 2, y / 2), 4, big.pixel(x, y));
  EXPECT_NEAR(sim(small, big, enc), 1.0, 1e-9);
}

TEST(CosineTest, RejectsMixedBackends) {
  Embedding a{{1, 0}, "x"}, b{{1, 0}, "y"}, c{{1, 0, 0}, "x"};
  EXPECT_THROW(cosine(a, b), ContractError);
  EXPECT_THROW(cosine(a, c), ContractError);
}

std::vector<SimilarityRecord> records(std::initializer_list<std::pair<double, bool>> values) {
  std::vector<SimilarityRecord> out;
  int i = 0;
  for (auto [v, failed] : values) out.push_back({"s" + std::to_string(i++), "ref-64", v, failed});
  return out;
}

TEST(VcsTest, MeanOfSimilarities) {
  EXPECT_DOUBLE_EQ(vcs(records({{0.8, false}, {0.6, false}})), 0.7);
}

TEST(VcsTest, FailuresCountAsZeroUnlessExcluded) {
  const auto r = records({{1.0, false}, {0.0, true}, {0.5, false}});
  EXPECT_DOUBLE_EQ(vcs(r), 0.5);
  EXPECT_DOUBLE_EQ(vcs(r, true), 0.75);
}

TEST(VcsTest, EmptyAndAllFailedAreUndefined) {
  EXPECT_THROW(vcs({}), UndefinedAggregate);
  EXPECT_THROW(vcs(records({{0.0, true}}), true), UndefinedAggregate);
}

TEST(VcsTest, RejectsMixedBackends) {
  auto r = records({{0.1, false}, {0.2, false}});
  r[1].backend_id = "other";
  EXPECT_THROW(vcs(r), ContractError);
}

TEST(VcsTest, PermutationInvariantAndBounded) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SimilarityRecord> r;
    const int n = 1 + static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) r.push_back({std::to_string(i), "b", u(rng), false});
    const double v = vcs(r);
    std::shuffle(r.begin(), r.end(), rng);
    EXPECT_EQ(vcs(r), v);
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end(), [](auto& a, auto& b) {
      return a.value < b.value;
    });
    EXPECT_GE(v, lo->value);
    EXPECT_LE(v, hi->value);
  }
}

TEST(OnnxEncoderTest, MissingModelIsBackendUnavailable) {
  EXPECT_THROW(OnnxEncoder({.model_path = "/nonexistent/model.onnx", .resolution = 224, .dim = 512}),
               BackendUnavailable);
  EXPECT_THROW(make_encoder({{"type", "onnx"}, {"model_path", "/nope.onnx"},
                             {"resolution", 224}, {"dim", 512}}),
               BackendUnavailable);
  EXPECT_THROW(make_encoder({{"type", "clip-magic"}}), ConfigError);
}

// Exports a tiny pooling network with torch and runs it through the
// out-of-process helper.
TEST(OnnxEncoderTest, TinyExportedModel) {
  if (!testing::have_python_module("torch") || !testing::have_python_module("onnxruntime")) {
    GTEST_SKIP() << "torch or onnxruntime not available";
  }
  TempDir dir;
  const fs::path model = dir.path() / "tiny.onnx";
  const std::string script =
      "import torch, warnings\n"
      "warnings.simplefilter('ignore')\n"
      "m = torch.nn.Sequential(torch.nn.AdaptiveAvgPool2d(4), torch.nn.Flatten())\n"
      "torch.onnx.export(m, torch.zeros(1, 3, 32, 32), '" + model.string() +
      "', input_names=['pixel_values'], dynamo=False)\n";
  write_file_atomic(dir.path() / "export.py", script);
  run_and_capture({"python3", (dir.path() / "export.py").string()}, 300);
  if (!fs::exists(model)) GTEST_SKIP() << "onnx export unavailable";

  OnnxEncoder enc({.model_path = model, .resolution = 32, .dim = 48});
  EXPECT_EQ(enc.id().rfind("onnx:", 0), 0u);
  const Image img = synthetic_chart(6);
  EXPECT_NEAR(sim(img, img, enc), 1.0, 1e-6);
  EXPECT_LT(sim(img, invert(img), enc), 0.99);
}

}  // namespace
}  // namespace capcheck
