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

#include <set>
#include <thread>

#include "capcheck/error.hpp"
#include "capcheck/verify.hpp"
#include "capcheck/verify_http.hpp"
#include "httplib.h"
#include "test_util.hpp"

namespace capcheck {
namespace {

using testing::FakeRunner;
using testing::fenced;

TEST(VerdictTest, AcceptIffPass) {
  EXPECT_NO_THROW(check_verdict(Decision::kAccept, Scenario::kPass));
  for (Scenario s : {Scenario::kIncorrectCaption, Scenario::kInsufficientDetail, Scenario::kCodeError}) {
    EXPECT_THROW(check_verdict(Decision::kAccept, s), ContractError);
    EXPECT_NO_THROW(check_verdict(Decision::kReject, s));
  }
  EXPECT_THROW(check_verdict(Decision::kReject, Scenario::kPass), ContractError);
}

TEST(VerdictTest, WireNames) {
  EXPECT_EQ(parse_scenario("B"), Scenario::kInsufficientDetail);
  EXPECT_EQ(parse_scenario("C_code_error"), Scenario::kCodeError);
  EXPECT_EQ(to_string(Scenario::kPass), "D_pass");
  EXPECT_THROW(parse_scenario("E"), ValidationError);
  EXPECT_THROW(parse_decision("maybe"), ValidationError);
}

TEST(MedianTest, Definition) {
  EXPECT_EQ(median({2, 4, 100}), 4.0);
  EXPECT_EQ(median({1, 2, 3, 10}), 2.5);
  EXPECT_FALSE(median({}).has_value());
}

std::vector<GoldLabel> gold_labels(int correct, int incorrect) {
  std::vector<GoldLabel> g;
  for (int i = 0; i < correct; ++i) g.push_back({"c" + std::to_string(i), true});
  for (int i = 0; i < incorrect; ++i) g.push_back({"x" + std::to_string(i), false});
  return g;
}

TEST(GoldEvalTest, PublishedConfusionPattern) {
  // 10 correct captions with one false reject; 5 incorrect, all rejected.
  std::map<std::string, Decision> d;
  for (int i = 0; i < 10; ++i) d["c" + std::to_string(i)] = i == 0 ? Decision::kReject : Decision::kAccept;
  for (int i = 0; i < 5; ++i) d["x" + std::to_string(i)] = Decision::kReject;
  const ScoreTriple s = gold_eval(d, gold_labels(10, 5));
  EXPECT_DOUBLE_EQ(s.precision, 1.0);
  EXPECT_DOUBLE_EQ(s.recall, 0.9);
  EXPECT_NEAR(s.f1, 0.947368421052631, 1e-12);
  EXPECT_EQ(s.n, 15u);
}

TEST(GoldEvalTest, AcceptEverything) {
  std::map<std::string, Decision> d;
  for (const auto& g : gold_labels(5, 5)) d[g.sample_id] = Decision::kAccept;
  const ScoreTriple s = gold_eval(d, gold_labels(5, 5));
  EXPECT_DOUBLE_EQ(s.precision, 0.5);
  EXPECT_DOUBLE_EQ(s.recall, 1.0);
  EXPECT_DOUBLE_EQ(s.f1, 2.0 / 3);
}

TEST(GoldEvalTest, PerfectReviewer) {
  std::map<std::string, Decision> d;
  for (const auto& g : gold_labels(3, 2)) d[g.sample_id] = g.caption_correct ? Decision::kAccept : Decision::kReject;
  EXPECT_EQ(gold_eval(d, gold_labels(3, 2)).f1, 1.0);
}

TEST(GoldEvalTest, MissingVerdictsAreListed) {
  std::map<std::string, Decision> d = {{"c0", Decision::kAccept}};
  try {
    gold_eval(d, gold_labels(2, 1));
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("c1"), std::string::npos);
    EXPECT_NE(msg.find("x0"), std::string::npos);
  }
}

TEST(GoldEvalTest, ParseArrayOrLines) {
  EXPECT_EQ(parse_gold(R"([{"sample_id": "a", "caption_correct": true}])").size(), 1u);
  const auto g = parse_gold("{\"sample_id\": \"a\", \"caption_correct\": true}\n"
                            "{\"sample_id\": \"b\", \"caption_correct\": false}\n");
  ASSERT_EQ(g.size(), 2u);
  EXPECT_FALSE(g[1].caption_correct);
  EXPECT_THROW(parse_gold(R"([{"sample_id": "a", "caption_correct": true},
                              {"sample_id": "a", "caption_correct": false}])"),
               ValidationError);
}

// Five fake-runner samples; `broken` lists samples whose code never renders.
class VerifyTest : public ::testing::Test {
 protected:
  void SetUp() override { write_corpus({}); }

  void write_corpus(const std::set<int>& broken, int n = 5, const std::string& name = "m.jsonl") {
    FakeRunner painter;
    std::string manifest;
    nlohmann::json rules = nlohmann::json::array();
    for (int i = 0; i < n; ++i) {
      const std::string id = "s" + std::to_string(i);
      write_file_atomic(dir_.path() / (id + ".png"), painter.run("chart " + std::to_string(i)).image_png);
      manifest += nlohmann::json{{"id", id}, {"image", id + ".png"}, {"caption", "caption-" + id}}.dump() + "\n";
      const std::string code = broken.contains(i) ? "fail: KeyError: 'x'" : "chart " + std::to_string(i);
      rules.push_back({{"match", "caption-" + id}, {"responses", {fenced(code)}}});
    }
    rules.push_back({{"match", "fail:"}, {"responses", {fenced("fail: KeyError: 'x'")}}});
    write_file_atomic(dir_.path() / name, manifest);
    transcript_ = {{"id", "mock:verify"}, {"rules", rules}};
  }

  std::unique_ptr<VerifyService> boot(bool background = false, std::size_t snapshot_every = 0) {
    VerifyConfig c;
    c.state_dir = dir_.path() / "state";
    c.background = background;
    c.snapshot_every = snapshot_every;
    VerifyBackends b;
    b.text = std::shared_ptr<TextBackend>(ScriptedBackend::FromTranscript(transcript_));
    b.runner = std::make_shared<FakeRunner>();
    b.prompts = std::make_shared<const PromptSet>(default_prompts());
    b.clock = clock_;
    return std::make_unique<VerifyService>(c, b);
  }

  fs::path manifest() const { return dir_.path() / "m.jsonl"; }

  TempDir dir_;
  nlohmann::json transcript_;
  std::shared_ptr<ManualClock> clock_ = std::make_shared<ManualClock>();
};

TEST_F(VerifyTest, FreshServiceHasZeroCounts) {
  auto svc = boot();
  const VerifyStats s = svc->stats();
  for (const auto& [k, v] : s.by_status) EXPECT_EQ(v, 0u) << k;
  for (const auto& [k, v] : s.by_scenario) EXPECT_EQ(v, 0u) << k;
  EXPECT_EQ(s.queue_depth, 0u);
  EXPECT_FALSE(s.median_decision_seconds.has_value());
  EXPECT_FALSE(svc->next_review("r1").has_value());
}

TEST_F(VerifyTest, AllSucceedGivesPendingItems) {
  auto svc = boot();
  const auto r = svc->enqueue_job(manifest());
  EXPECT_TRUE(r.created);
  EXPECT_EQ(svc->job(r.job_id)->state, "complete");
  EXPECT_EQ(svc->stats().by_status.at("pending"), 5u);
  const auto items = svc->items();
  ASSERT_EQ(items.size(), 5u);
  EXPECT_EQ(items[0].sample_id, "s0");
  ASSERT_TRUE(items[0].reconstructed_image_ref.has_value());
  EXPECT_TRUE(svc->image(items[0].original_image_ref).has_value());
  EXPECT_TRUE(svc->image(*items[0].reconstructed_image_ref).has_value());
  EXPECT_TRUE(fs::path(items[0].sample["image"].get<std::string>()).is_absolute());
}

TEST_F(VerifyTest, RenderFailureIsAutoRejectedAsCodeError) {
  write_corpus({3});
  auto svc = boot();
  svc->enqueue_job(manifest());
  const VerifyStats s = svc->stats();
  EXPECT_EQ(s.by_status.at("pending"), 4u);
  EXPECT_EQ(s.by_status.at("render_failed"), 1u);
  EXPECT_EQ(s.by_scenario.at("C_code_error"), 1u);
  EXPECT_EQ(s.human_verdicts, 0u);
  const auto failed = svc->items()[3];
  EXPECT_EQ(failed.status, ItemStatus::kRenderFailed);
  ASSERT_TRUE(failed.verdict.has_value());
  EXPECT_EQ(failed.verdict->decision, Decision::kReject);
  EXPECT_EQ(failed.verdict->reviewer_id, kSystemReviewer);
  EXPECT_EQ(failed.attempts, 3);
  EXPECT_FALSE(failed.reconstructed_image_ref.has_value());
  // Never leased.
  std::set<std::string> leased;
  while (auto it = svc->next_review("r" + std::to_string(leased.size()))) leased.insert(it->sample_id);
  EXPECT_EQ(leased, (std::set<std::string>{"s0", "s1", "s2", "s4"}));
}

TEST_F(VerifyTest, ReEnqueueIsIdempotent) {
  auto svc = boot();
  const auto a = svc->enqueue_job(manifest());
  const auto b = svc->enqueue_job(manifest());
  EXPECT_EQ(a.job_id, b.job_id);
  EXPECT_FALSE(b.created);
  EXPECT_EQ(svc->items().size(), 5u);
}

TEST_F(VerifyTest, FifoLeasesAreExclusive) {
  auto svc = boot();
  svc->enqueue_job(manifest());
  const auto a = svc->next_review("alice");
  const auto b = svc->next_review("bob");
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->sample_id, "s0");
  EXPECT_EQ(b->sample_id, "s1");
  EXPECT_EQ(svc->next_review("alice")->item_id, a->item_id);  // same lease handed back
  EXPECT_THROW(svc->submit_verdict(a->item_id, Decision::kAccept, Scenario::kPass, "bob"), ConflictError);
}

TEST_F(VerifyTest, ExpiredLeaseReturnsToQueue) {
  auto svc = boot();
  svc->enqueue_job(manifest());
  const auto a = svc->next_review("alice");
  clock_->advance(301);
  EXPECT_THROW(svc->submit_verdict(a->item_id, Decision::kAccept, Scenario::kPass, "alice"), ConflictError);
  EXPECT_EQ(svc->item(a->item_id)->status, ItemStatus::kPending);
  EXPECT_EQ(svc->next_review("bob")->item_id, a->item_id);
}

TEST_F(VerifyTest, ExpiredLeaseIsSweptOnRead) {
  auto svc = boot();
  svc->enqueue_job(manifest());
  const auto a = svc->next_review("alice");
  clock_->advance(300);
  EXPECT_EQ(svc->stats().by_status.at("leased"), 0u);
  EXPECT_EQ(svc->next_review("bob")->item_id, a->item_id);
}

TEST_F(VerifyTest, VerdictsAreFinal) {
  auto svc = boot();
  svc->enqueue_job(manifest());
  const auto a = svc->next_review("alice");
  EXPECT_THROW(svc->submit_verdict(a->item_id, Decision::kAccept, Scenario::kIncorrectCaption, "alice"),
               ContractError);
  clock_->advance(6);
  const auto done = svc->submit_verdict(a->item_id, Decision::kAccept, Scenario::kPass, "alice");
  EXPECT_EQ(done.status, ItemStatus::kAccepted);
  EXPECT_EQ(done.verdict->decision_seconds, 6.0);
  EXPECT_THROW(svc->submit_verdict(a->item_id, Decision::kReject, Scenario::kIncorrectCaption, "alice"),
               ConflictError);
  const auto b = svc->next_review("alice");
  EXPECT_THROW(svc->submit_verdict(b->item_id, Decision::kReject, Scenario::kCodeError, "system"),
               ContractError);
  EXPECT_THROW(svc->submit_verdict("it-nope", Decision::kAccept, Scenario::kPass, "alice"), DataError);
  EXPECT_THROW(svc->submit_verdict(svc->items()[4].item_id, Decision::kAccept, Scenario::kPass, "alice"),
               ConflictError);  // never leased
}

TEST_F(VerifyTest, StatsCountScenariosAndDecisionTimes) {
  auto svc = boot();
  svc->enqueue_job(manifest());
  const std::vector<std::pair<double, Scenario>> plan = {
      {2, Scenario::kPass}, {4, Scenario::kPass}, {100, Scenario::kPass}, {4, Scenario::kInsufficientDetail}};
  for (auto [secs, scenario] : plan) {
    const auto it = svc->next_review("r");
    clock_->advance(secs);
    svc->submit_verdict(it->item_id, scenario == Scenario::kPass ? Decision::kAccept : Decision::kReject,
                        scenario, "r");
  }
  const VerifyStats s = svc->stats();
  EXPECT_EQ(s.by_status.at("accepted"), 3u);
  EXPECT_EQ(s.by_status.at("rejected"), 1u);
  EXPECT_EQ(s.by_scenario.at("D_pass"), 3u);
  EXPECT_EQ(s.by_scenario.at("B_insufficient_detail"), 1u);
  EXPECT_EQ(s.median_decision_seconds, 4.0);
  EXPECT_EQ(s.mean_decision_seconds, 27.5);
  EXPECT_EQ(s.queue_depth, 1u);
  EXPECT_EQ(svc->export_manifest(true),
            R"({"caption":"caption-s0","id":"s0","image":")" + (dir_.path() / "s0.png").string() +
                "\"}\n" + R"({"caption":"caption-s1","id":"s1","image":")" +
                (dir_.path() / "s1.png").string() + "\"}\n" +
                R"({"caption":"caption-s2","id":"s2","image":")" + (dir_.path() / "s2.png").string() +
                "\"}\n");
}

TEST_F(VerifyTest, ServiceGoldEvalUsesVerdicts) {
  auto svc = boot();
  svc->enqueue_job(manifest());
  std::vector<GoldLabel> gold;
  for (int i = 0; i < 5; ++i) {
    const auto it = svc->next_review("r");
    const bool correct = i != 2;
    gold.push_back({it->sample_id, correct});
    if (correct) {
      svc->submit_verdict(it->item_id, Decision::kAccept, Scenario::kPass, "r");
    } else {
      svc->submit_verdict(it->item_id, Decision::kReject, Scenario::kIncorrectCaption, "r");
    }
  }
  EXPECT_EQ(svc->gold_eval(gold).f1, 1.0);
  gold.push_back({"unknown", true});
  EXPECT_THROW(svc->gold_eval(gold), DataError);
}

void drive(VerifyService& svc, ManualClock& clock, int steps) {
  for (int i = 0; i < steps; ++i) {
    const std::string reviewer = "r" + std::to_string(i % 3);
    auto it = svc.next_review(reviewer);
    if (!it) return;
    clock.advance(1 + i % 5);
    if (i % 4 == 3) {
      clock.advance(400);  // let this lease lapse
      continue;
    }
    if (i % 3 == 0) {
      svc.submit_verdict(it->item_id, Decision::kAccept, Scenario::kPass, reviewer);
    } else {
      svc.submit_verdict(it->item_id, Decision::kReject, Scenario::kInsufficientDetail, reviewer);
    }
  }
}

TEST_F(VerifyTest, RebootReplaysIdenticalState) {
  write_corpus({1}, 12);
  std::vector<ReviewItem> before;
  VerifyStats stats_before;
  {
    auto svc = boot();
    svc->enqueue_job(manifest());
    drive(*svc, *clock_, 9);
    before = svc->items();
    stats_before = svc->stats();
  }
  auto again = boot();
  EXPECT_EQ(again->items(), before);
  EXPECT_EQ(again->stats(), stats_before);
}

TEST_F(VerifyTest, SnapshotPlusTailReplaysIdenticalState) {
  write_corpus({}, 12);
  std::vector<ReviewItem> before;
  std::size_t events = 0;
  {
    auto svc = boot(false, 7);
    svc->enqueue_job(manifest());
    drive(*svc, *clock_, 10);
    before = svc->items();
    events = svc->event_count();
  }
  EXPECT_TRUE(fs::exists(dir_.path() / "state" / "snapshot.json"));
  auto again = boot(false, 7);
  EXPECT_EQ(again->items(), before);
  EXPECT_EQ(again->event_count(), events);
}

TEST_F(VerifyTest, TornTailIsDropped) {
  std::vector<ReviewItem> before;
  {
    auto svc = boot();
    svc->enqueue_job(manifest());
    drive(*svc, *clock_, 3);
    before = svc->items();
  }
  const fs::path log = dir_.path() / "state" / "events.jsonl";
  write_file_atomic(log, read_file(log) + R"({"type": "verdict", "item_id": "it-)");
  {
    auto svc = boot();
    EXPECT_EQ(svc->items(), before);
    auto it = svc->next_review("late");
    ASSERT_TRUE(it.has_value());
  }
  auto third = boot();  // the append after the truncation replays cleanly
  EXPECT_EQ(third->items().size(), before.size());
}

TEST_F(VerifyTest, CorruptInteriorLineIsParseError) {
  {
    auto svc = boot();
    svc->enqueue_job(manifest());
  }
  const fs::path log = dir_.path() / "state" / "events.jsonl";
  write_file_atomic(log, "garbage\n" + read_file(log));
  EXPECT_THROW(boot(), ParseError);
}

TEST_F(VerifyTest, UnfinishedJobResumesOnBoot) {
  {
    VerifyConfig c;
    c.state_dir = dir_.path() / "state";
    c.background = false;
    VerifyService svc(c, {.clock = clock_});  // no reconstruction backends
    const auto r = svc.enqueue_job(manifest());
    EXPECT_EQ(svc.job(r.job_id)->state, "failed");
    EXPECT_TRUE(svc.items().empty());
  }
  auto svc = boot(true);
  const auto r = svc->enqueue_job(manifest());
  svc->wait_for_jobs();
  EXPECT_EQ(svc->job(r.job_id)->state, "complete");
  EXPECT_EQ(svc->items().size(), 5u);
}

TEST_F(VerifyTest, BackgroundJobsComplete) {
  auto svc = boot(true);
  const auto r = svc->enqueue_job(manifest());
  svc->wait_for_jobs();
  EXPECT_EQ(svc->job(r.job_id)->state, "complete");
  EXPECT_EQ(svc->stats().queue_depth, 5u);
}

TEST_F(VerifyTest, ConcurrentReviewersNeverShareAnItem) {
  write_corpus({}, 40);
  auto svc = boot();
  svc->enqueue_job(manifest());
  std::mutex mu;
  std::multiset<std::string> decided;
  std::vector<std::jthread> pool;
  for (int r = 0; r < 4; ++r) {
    pool.emplace_back([&, r] {
      const std::string reviewer = "rev" + std::to_string(r);
      while (auto it = svc->next_review(reviewer)) {
        svc->submit_verdict(it->item_id, Decision::kAccept, Scenario::kPass, reviewer);
        std::lock_guard lock(mu);
        decided.insert(it->item_id);
      }
    });
  }
  pool.clear();
  EXPECT_EQ(decided.size(), 40u);
  EXPECT_EQ(std::set<std::string>(decided.begin(), decided.end()).size(), 40u);
}

class VerifyHttpTest : public VerifyTest {
 protected:
  void SetUp() override {
    VerifyTest::SetUp();
    svc_ = boot();
    server_ = std::make_unique<VerifyServer>(*svc_, 0);
    client_ = std::make_unique<httplib::Client>("127.0.0.1", server_->start());
  }
  void TearDown() override {
    if (server_) server_->stop();
  }
  httplib::Result post(const std::string& path, const nlohmann::json& body) {
    return client_->Post(path, body.dump(), "application/json");
  }

  std::unique_ptr<VerifyService> svc_;
  std::unique_ptr<VerifyServer> server_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(VerifyHttpTest, ReviewRoundTrip) {
  auto res = post("/jobs", {{"manifest_path", manifest().string()}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  const std::string job_id = nlohmann::json::parse(res->body)["job_id"];
  res = post("/jobs", {{"manifest_path", manifest().string()}});
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(nlohmann::json::parse(res->body)["job_id"], job_id);
  EXPECT_EQ(client_->Get("/jobs/" + job_id)->status, 200);
  EXPECT_EQ(client_->Get("/jobs/job-unknown")->status, 404);

  res = client_->Get("/review/next?reviewer=alice");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  const auto item = nlohmann::json::parse(res->body);
  const std::string item_id = item["item_id"];
  EXPECT_EQ(item["status"], "leased");

  auto img = client_->Get(item["original_image_url"].get<std::string>());
  ASSERT_EQ(img->status, 200);
  EXPECT_EQ(img->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(content_hash(img->body).hex(), item["original_image_ref"].get<std::string>().substr(7));
  EXPECT_EQ(client_->Get("/images/" + std::string(64, '0'))->status, 404);

  EXPECT_EQ(post("/review/" + item_id, {{"decision", "accept"}, {"scenario", "A"}, {"reviewer", "alice"}})->status, 422);
  EXPECT_EQ(post("/review/" + item_id, {{"decision", "accept"}, {"scenario", "D"}, {"reviewer", "bob"}})->status, 409);
  EXPECT_EQ(post("/review/" + item_id, {{"decision", "yes"}, {"scenario", "D"}, {"reviewer", "alice"}})->status, 400);
  EXPECT_EQ(post("/review/it-0000", {{"decision", "accept"}, {"scenario", "D"}, {"reviewer", "alice"}})->status, 404);
  res = post("/review/" + item_id, {{"decision", "accept"}, {"scenario", "D_pass"}, {"reviewer", "alice"}});
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(nlohmann::json::parse(res->body)["status"], "accepted");
  EXPECT_EQ(post("/review/" + item_id, {{"decision", "accept"}, {"scenario", "D"}, {"reviewer", "alice"}})->status, 409);

  const auto stats = nlohmann::json::parse(client_->Get("/stats")->body);
  EXPECT_EQ(stats["by_status"]["accepted"], 1);
  EXPECT_EQ(stats["queue_depth"], 4);

  res = client_->Get("/export?accepted_only=true");
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(std::count(res->body.begin(), res->body.end(), '\n'), 1);
  const std::string all = client_->Get("/export")->body;
  EXPECT_EQ(std::count(all.begin(), all.end(), '\n'), 5);
}

TEST_F(VerifyHttpTest, EmptyQueueAndBadRequests) {
  EXPECT_EQ(client_->Get("/review/next?reviewer=alice")->status, 204);
  EXPECT_EQ(client_->Get("/review/next")->status, 400);
  EXPECT_EQ(client_->Post("/jobs", "{not json", "application/json")->status, 400);
  EXPECT_EQ(post("/jobs", {{"manifest_path", (dir_.path() / "nope.jsonl").string()}})->status, 400);
  EXPECT_EQ(client_->Options("/review/next")->status, 204);
}

TEST_F(VerifyHttpTest, GoldEvalEndpoint) {
  post("/jobs", {{"manifest_path", manifest().string()}});
  nlohmann::json gold = nlohmann::json::array();
  for (int i = 0; i < 5; ++i) {
    const auto item = nlohmann::json::parse(client_->Get("/review/next?reviewer=r")->body);
    post("/review/" + item["item_id"].get<std::string>(), {{"decision", "accept"}, {"scenario", "D"}, {"reviewer", "r"}});
    gold.push_back({{"sample_id", item["sample_id"]}, {"caption_correct", i % 2 == 0}});
  }
  write_file_atomic(dir_.path() / "gold.json", gold.dump());
  auto res = post("/gold-eval", {{"gold_path", (dir_.path() / "gold.json").string()}});
  ASSERT_EQ(res->status, 200);
  const auto s = nlohmann::json::parse(res->body);
  EXPECT_DOUBLE_EQ(s["precision"].get<double>(), 0.6);
  EXPECT_DOUBLE_EQ(s["recall"].get<double>(), 1.0);

  gold.push_back({{"sample_id", "zzz"}, {"caption_correct", true}});
  write_file_atomic(dir_.path() / "gold.json", gold.dump());
  EXPECT_EQ(post("/gold-eval", {{"gold_path", (dir_.path() / "gold.json").string()}})->status, 422);
}

}  // namespace
}  // namespace capcheck
