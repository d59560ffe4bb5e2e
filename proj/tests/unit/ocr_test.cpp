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

#include "capcheck/error.hpp"
#include "capcheck/image.hpp"
#include "capcheck/ocr.hpp"
#include "capcheck/sandbox.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace capcheck {
namespace {

TextSet ts(std::set<std::string> s) { return {std::move(s), "test", 0}; }

OcrRecord rec(std::set<std::string> t, std::set<std::string> t_hat) {
  return make_ocr_record("s", ts(std::move(t)), ts(std::move(t_hat)));
}

TEST(NormalizeTest, CollapsesCaseAndWhitespace) {
  const std::vector<std::string> in = {"  A  B ", "a b"};
  EXPECT_EQ(normalize(in), std::set<std::string>{"a b"});
}

TEST(NormalizeTest, AppliesCompatibilityMapping) {
  const std::vector<std::string> in = {"①", "ＡＢＣ", "ﬁ"};
  EXPECT_EQ(normalize(in), (std::set<std::string>{"1", "abc", "fi"}));
}

TEST(NormalizeTest, DropsEmptyStrings) {
  const std::vector<std::string> in = {"", "   ", "\t\n"};
  EXPECT_TRUE(normalize(in).empty());
}

TEST(NormalizeTest, IsIdempotent) {
  for (std::string s : {"  Ｈｅｌｌｏ　World ", "Σ Growth (%)", "İstanbul", "x²", "①②"}) {
    const std::string once = normalize_text(s);
    EXPECT_EQ(normalize_text(once), once) << s;
  }
}

TEST(ExtractTextTest, NormalizesAndDeduplicates) {
  auto engine = MockOcrEngine::Constant({"Sales", "sales", "  2019 "});
  const TextSet t = extract_text(encode_png(Image(4, 4)), *engine);
  EXPECT_EQ(t.strings, (std::set<std::string>{"sales", "2019"}));
  EXPECT_EQ(t.raw_count, 3u);
  EXPECT_EQ(t.engine_id, "mock:constant");
}

TEST(ExtractTextTest, FigureTextEngineReadsEmbeddedChunk) {
  FigureTextEngine engine;
  const std::string png = encode_png(Image(4, 4), {{"capcheck:text", R"(["Fruit Sales 2019", "Apples"])"}});
  EXPECT_EQ(extract_text(png, engine).strings,
            (std::set<std::string>{"fruit sales 2019", "apples"}));
  EXPECT_TRUE(extract_text(encode_png(Image(4, 4)), engine).strings.empty());
  EXPECT_THROW(extract_text("garbage", engine), DecodeError);
}

TEST(ExtractTextTest, ExternalEngineHonoursConfidence) {
  TempDir dir;
  const fs::path script = dir.path() / "engine.py";
  write_file_atomic(script,
                    "import json\n"
                    "print(json.dumps([{'text': 'Title', 'confidence': 0.9},"
                    " {'text': 'blur', 'confidence': 0.2}]))\n");
  ExternalOcrEngine engine("ext", {"python3", script.string()});
  const std::string png = encode_png(Image(4, 4));
  EXPECT_EQ(extract_text(png, engine).strings, (std::set<std::string>{"title", "blur"}));
  EXPECT_EQ(extract_text(png, engine, 0.5).strings, std::set<std::string>{"title"});
  EXPECT_THROW(extract_text("garbage", engine), DecodeError);
}

TEST(ExtractTextTest, BrokenExternalEngineIsBackendUnavailable) {
  ExternalOcrEngine engine("ext", {"python3", "-c", "print('not json')"});
  EXPECT_THROW(extract_text(encode_png(Image(4, 4)), engine), BackendUnavailable);
}

TEST(ExtractTextTest, RapidOcrReadsMatplotlibTitle) {
  if (!testing::have_matplotlib() || !testing::have_python_module("rapidocr_onnxruntime")) {
    GTEST_SKIP() << "matplotlib or rapidocr_onnxruntime not available";
  }
  const auto o = execute(
      "import matplotlib.pyplot as plt\n"
      "fig, ax = plt.subplots(figsize=(5, 4))\n"
      "ax.bar(['Apples', 'Pears'], [3, 5])\n"
      "ax.set_title('Fruit Sales 2019', fontsize=16)\n",
      SandboxConfig{});
  ASSERT_EQ(o.status, RenderStatus::kSuccess) << o.stderr_tail;
  auto engine = make_ocr_engine(
      {{"type", "external"},
       {"command", {"python3", (resource_root() / "tools" / "ocr_rapidocr.py").string()}}});
  const TextSet t = extract_text(o.image_png, *engine);
  // The engine may merge words, so the title is compared without spaces.
  std::set<std::string> squeezed;
  for (std::string x : t.strings) {
    std::erase(x, ' ');
    squeezed.insert(x);
  }
  EXPECT_TRUE(squeezed.contains("fruitsales2019")) << nlohmann::json(t.strings).dump();
  EXPECT_TRUE(t.strings.contains("apples")) << nlohmann::json(t.strings).dump();
  EXPECT_TRUE(extract_text(encode_png(Image(200, 200)), *engine).strings.empty());
}

TEST(OcrScoreTest, WorkedExample) {
  const std::vector<OcrRecord> r = {rec({"2019", "sales", "revenue"}, {"sales", "revenue", "profit"})};
  const ScoreTriple s = ocrscore(r);
  EXPECT_EQ(r[0].intersection_size, 2u);
  EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3);
  EXPECT_DOUBLE_EQ(s.recall, 2.0 / 3);
  EXPECT_DOUBLE_EQ(s.f1, 2.0 / 3);
  EXPECT_EQ(s.n, 1u);
}

TEST(OcrScoreTest, MicroAveragePoolsCounts) {
  const std::vector<OcrRecord> r = {rec({"a", "b"}, {"a"}), rec({"c"}, {"c", "d"})};
  const ScoreTriple s = ocrscore(r);
  EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3);
  EXPECT_DOUBLE_EQ(s.recall, 2.0 / 3);
  EXPECT_DOUBLE_EQ(s.f1, 2.0 / 3);
  // Averaging the per-record F1s gives 2/3 too here, but the per-record
  // precisions (1, 1/2) and recalls (1/2, 1) do not pool to it.
  const double macro_p = (1.0 + 0.5) / 2;
  EXPECT_NE(s.precision, macro_p);
}

TEST(OcrScoreTest, IdentityAndZeroConventions) {
  EXPECT_EQ(ocrscore(std::vector{rec({"x", "y"}, {"x", "y"}), rec({"z"}, {"z"})}).f1, 1.0);
  const auto empty_hat = ocrscore(std::vector{rec({"x"}, {})});
  EXPECT_EQ(empty_hat.precision, 0.0);
  EXPECT_EQ(empty_hat.recall, 0.0);
  EXPECT_EQ(empty_hat.f1, 0.0);
  EXPECT_EQ(ocrscore(std::vector{rec({}, {"x"})}).recall, 0.0);
  EXPECT_THROW(ocrscore(std::vector<OcrRecord>{}), UndefinedAggregate);
}

TEST(OcrScoreTest, MatchesBruteForceOracle) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<testing::SetPair> corpus;
    std::vector<OcrRecord> records;
    const int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) {
      testing::SetPair p{testing::random_string_set(rng, 10), testing::random_string_set(rng, 10)};
      records.push_back(rec(p.t, p.t_hat));
      corpus.push_back(std::move(p));
    }
    const ScoreTriple s = ocrscore(records);
    const auto o = testing::brute_force_micro_prf(corpus);
    ASSERT_NEAR(s.precision, o.p, 1e-12);
    ASSERT_NEAR(s.recall, o.r, 1e-12);
    ASSERT_NEAR(s.f1, o.f1, 1e-12);
    ASSERT_EQ(s.f1 == 0.0, o.p * o.r == 0.0);
  }
}

TEST(OcrScoreTest, AddingAMatchedStringNeverLowersF1) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<OcrRecord> records;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      records.push_back(rec(testing::random_string_set(rng, 6), testing::random_string_set(rng, 6)));
    }
    const double before = ocrscore(records).f1;
    auto& target = records[rng() % records.size()];
    auto t = target.t.strings, t_hat = target.t_hat.strings;
    t.insert("fresh-" + std::to_string(trial));
    t_hat.insert("fresh-" + std::to_string(trial));
    target = rec(t, t_hat);
    EXPECT_GE(ocrscore(records).f1, before - 1e-15);
  }
}

TEST(OcrScoreTest, RecordIntersectionIsBounded) {
  const OcrRecord r = rec({"a", "b", "c"}, {"b", "c", "d", "e"});
  EXPECT_EQ(r.intersection_size, 2u);
  EXPECT_LE(r.intersection_size, std::min(r.t.strings.size(), r.t_hat.strings.size()));
}

TEST(FuzzyOcrScoreTest, EditSimilarity) {
  EXPECT_DOUBLE_EQ(edit_similarity("sales", "sales"), 1.0);
  EXPECT_DOUBLE_EQ(edit_similarity("sales", "sale5"), 0.8);
  EXPECT_DOUBLE_EQ(edit_similarity("", ""), 1.0);
  EXPECT_DOUBLE_EQ(edit_similarity("ab", ""), 0.0);
}

TEST(FuzzyOcrScoreTest, ToleratesNearMisses) {
  const std::vector<OcrRecord> r = {rec({"revenue", "2019"}, {"revenve", "2019"})};
  EXPECT_DOUBLE_EQ(ocrscore(r).f1, 0.5);
  EXPECT_DOUBLE_EQ(ocrscore_fuzzy(r, 0.8).f1, 1.0);
  EXPECT_DOUBLE_EQ(ocrscore_fuzzy(r, 1.0).f1, 0.5);
}

}  // namespace
}  // namespace capcheck
