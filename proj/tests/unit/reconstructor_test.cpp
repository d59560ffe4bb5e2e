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
#include "capcheck/reconstructor.hpp"
#include "test_util.hpp"

namespace capcheck {
namespace {

using testing::FakeRunner;
using testing::fenced;

ChartSample sample(std::string caption = "Sales per quarter rose from 10 to 40.") {
  return {.id = "s1", .image_ref = "s1.png", .caption = std::move(caption)};
}

TEST(StripCodeFencesTest, TakesFirstFencedBlock) {
  EXPECT_EQ(strip_code_fences("Here:\n```python\nx = 1\n```\ntrailing"), "x = 1");
  EXPECT_EQ(strip_code_fences("```\ny = 2\n```"), "y = 2");
  EXPECT_EQ(strip_code_fences("  z = 3  \n"), "z = 3");
}

TEST(ReconstructTest, SucceedsFirstTry) {
  auto backend = ScriptedBackend::Sequence({fenced("chart 7\ntext:Sales")});
  FakeRunner runner;
  const auto rec = reconstruct(sample(), *backend, runner, default_prompts(), 3);
  ASSERT_TRUE(rec.succeeded());
  EXPECT_EQ(rec.attempts.size(), 1u);
  EXPECT_EQ(rec.final_code, "chart 7\ntext:Sales");
  EXPECT_EQ(rec.rendered_image_ref, image_ref_for(rec.image_png));
  EXPECT_EQ(rec.figure_texts, std::vector<std::string>{"Sales"});
}

// k failing attempts followed by a good one take exactly k+1 attempts, for
// every k below the budget.
TEST(ReconstructTest, RepairLoopCountsAttempts) {
  const int budget = 4;
  for (int k = 0; k < budget; ++k) {
    std::vector<std::string> responses;
    for (int i = 0; i < k; ++i) responses.push_back(fenced("fail: ValueError: bad " + std::to_string(i)));
    responses.push_back(fenced("chart 1"));
    auto backend = ScriptedBackend::Sequence(responses);
    FakeRunner runner;
    const auto rec = reconstruct(sample(), *backend, runner, default_prompts(), budget);
    ASSERT_TRUE(rec.succeeded()) << "k=" << k;
    EXPECT_EQ(rec.attempts.size(), static_cast<std::size_t>(k + 1));
    EXPECT_EQ(backend->calls(), static_cast<std::size_t>(k + 1));
    for (int i = 0; i < k; ++i) EXPECT_EQ(rec.attempts[i].outcome, RenderStatus::kRuntimeError);
  }
}

TEST(ReconstructTest, PromptsCarryCaptionThenPreviousCodeAndError) {
  auto backend = ScriptedBackend::Sequence(
      {fenced("fail: ZeroDivisionError: division by zero"), fenced("chart 3")});
  FakeRunner runner;
  const auto s = sample();
  reconstruct(s, *backend, runner, default_prompts(), 3);
  const auto t = backend->transcript();
  ASSERT_EQ(t.size(), 2u);
  EXPECT_NE(t[0].prompt.find(s.caption), std::string::npos);
  EXPECT_NE(t[1].prompt.find("fail: ZeroDivisionError: division by zero"), std::string::npos);
  EXPECT_NE(t[1].prompt.find("division by zero"), std::string::npos);
  EXPECT_EQ(t[0].system, default_prompts().regen_system);
  EXPECT_EQ(t[1].system, default_prompts().debug_system);
}

TEST(ReconstructTest, ExhaustedBudgetFails) {
  auto backend = ScriptedBackend::Sequence(
      {fenced("fail: E1"), fenced("nofig"), fenced("fail: E3")});
  FakeRunner runner;
  const auto rec = reconstruct(sample(), *backend, runner, default_prompts(), 3);
  EXPECT_FALSE(rec.succeeded());
  EXPECT_EQ(rec.attempts.size(), 3u);
  EXPECT_EQ(rec.attempts[1].outcome, RenderStatus::kNoFigure);
  EXPECT_FALSE(rec.rendered_image_ref.has_value());
  EXPECT_EQ(runner.runs(), 3u);
}

TEST(ReconstructTest, EmptyResponseIsAFailedAttempt) {
  auto backend = ScriptedBackend::Sequence({"```python\n```", fenced("chart 2")});
  FakeRunner runner;
  const auto rec = reconstruct(sample(), *backend, runner, default_prompts(), 3);
  ASSERT_TRUE(rec.succeeded());
  EXPECT_EQ(rec.attempts.size(), 2u);
  EXPECT_EQ(runner.runs(), 1u);
}

TEST(ReconstructTest, TransportFailureIsInfrastructureError) {
  ScriptedBackend backend("down", [](const TextRequest&, std::size_t) -> std::string {
    throw TransportError("connection refused");
  });
  FakeRunner runner;
  EXPECT_THROW(reconstruct(sample(), backend, runner, default_prompts(), 3), InfrastructureError);
}

TEST(ReconstructTest, JsonRoundTrip) {
  auto backend = ScriptedBackend::Sequence({fenced("fail: E"), fenced("chart 5")});
  FakeRunner runner;
  const auto rec = reconstruct(sample(), *backend, runner, default_prompts(), 3);
  const auto again = reconstruction_from_json(to_json(rec));
  EXPECT_EQ(again.sample_id, rec.sample_id);
  EXPECT_EQ(again.final_code, rec.final_code);
  EXPECT_EQ(again.rendered_image_ref, rec.rendered_image_ref);
  ASSERT_EQ(again.attempts.size(), 2u);
  EXPECT_EQ(again.attempts[0].message, rec.attempts[0].message);
  EXPECT_EQ(again.attempts[0].outcome, RenderStatus::kRuntimeError);
}

TEST(ReconstructTest, RejectsZeroBudget) {
  auto backend = ScriptedBackend::Sequence({});
  FakeRunner runner;
  EXPECT_THROW(reconstruct(sample(), *backend, runner, default_prompts(), 0), ContractError);
}

}  // namespace
}  // namespace capcheck
