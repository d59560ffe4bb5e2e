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

#ifndef CAPCHECK_VERIFY_HPP_
#define CAPCHECK_VERIFY_HPP_

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "capcheck/prompts.hpp"
#include "capcheck/sandbox.hpp"
#include "capcheck/score.hpp"
#include "capcheck/text_backend.hpp"
#include "json.hpp"

namespace capcheck {

// Human verification of (original, reconstruction, caption) triples.
//
// All state changes are events appended to <state_dir>/events.jsonl and
// applied to memory only after the append succeeds. Events carry their own
// timestamps, so replaying the log rebuilds exactly the state that was live.

enum class ItemStatus { kPending, kLeased, kAccepted, kRejected, kRenderFailed };
enum class Decision { kAccept, kReject };
enum class Scenario { kIncorrectCaption, kInsufficientDetail, kCodeError, kPass };

std::string_view to_string(ItemStatus s);
std::string_view to_string(Decision d);
std::string_view to_string(Scenario s);  // A_incorrect_caption, ..., D_pass
ItemStatus parse_item_status(std::string_view s);
Decision parse_decision(std::string_view s);
// Accepts the full names and the bare letters A-D.
Scenario parse_scenario(std::string_view s);

class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() const = 0;  // seconds
};

class SystemClock : public Clock {
 public:
  double now() const override;
};

class ManualClock : public Clock {
 public:
  explicit ManualClock(double start = 1.0e9) : t_(start) {}
  double now() const override { return t_.load(); }
  void advance(double seconds) { t_.store(t_.load() + seconds); }

 private:
  std::atomic<double> t_;
};

struct Lease {
  std::string reviewer_id;
  double granted_at = 0;
  double expiry = 0;

  friend bool operator==(const Lease&, const Lease&) = default;
};

struct Verdict {
  Decision decision = Decision::kReject;
  Scenario scenario = Scenario::kCodeError;
  std::string reviewer_id;
  double decision_seconds = 0;
  double timestamp = 0;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

inline constexpr std::string_view kSystemReviewer = "system";

// Throws ContractError unless accept <=> D_pass.
void check_verdict(Decision decision, Scenario scenario);

struct ReviewItem {
  std::string item_id;
  std::string job_id;
  std::uint64_t seq = 0;  // FIFO position
  std::string sample_id;
  nlohmann::json sample;  // manifest entry, image path made absolute
  std::string original_image_ref;                      // "sha256:<hex>"
  std::optional<std::string> reconstructed_image_ref;  // absent if rendering failed
  std::string caption;
  ItemStatus status = ItemStatus::kPending;
  std::optional<Lease> lease;
  std::optional<Verdict> verdict;
  int attempts = 0;

  friend bool operator==(const ReviewItem&, const ReviewItem&) = default;
};

nlohmann::json to_json(const ReviewItem& item);

struct Job {
  std::string job_id;
  std::string manifest_path;
  std::string manifest_digest;
  std::size_t total = 0;
  std::string state;  // "running", "complete", "failed"
  std::string error;
  double created_at = 0;

  friend bool operator==(const Job&, const Job&) = default;
};

nlohmann::json to_json(const Job& job);

struct GoldLabel {
  std::string sample_id;
  bool caption_correct = false;
};

// JSON array or line-JSON of {sample_id, caption_correct}. Throws
// ValidationError on a repeated sample_id.
std::vector<GoldLabel> parse_gold(std::string_view text);

// Accept predicts caption_correct = true. Throws DataError listing every
// gold sample without a decision.
ScoreTriple gold_eval(const std::map<std::string, Decision>& decisions,
                      const std::vector<GoldLabel>& gold);

struct VerifyConfig {
  fs::path state_dir;
  double lease_ttl_seconds = 300;
  int max_attempts = 3;
  // Write a snapshot after this many events; 0 disables snapshots.
  std::size_t snapshot_every = 200;
  // Send render failures to reviewers instead of auto-rejecting them.
  bool route_render_failures_to_review = false;
  // Reconstruct in a background thread; otherwise enqueue_job blocks.
  bool background = true;
};

struct VerifyBackends {
  std::shared_ptr<TextBackend> text;
  std::shared_ptr<CodeRunner> runner;
  std::shared_ptr<const PromptSet> prompts;
  std::shared_ptr<const Clock> clock;
};

struct EnqueueResult {
  std::string job_id;
  bool created = false;  // false when the manifest was already enqueued
};

struct VerifyStats {
  std::map<std::string, std::size_t> by_status;
  std::map<std::string, std::size_t> by_scenario;
  std::size_t human_verdicts = 0;
  std::optional<double> median_decision_seconds;
  std::optional<double> mean_decision_seconds;
  std::size_t queue_depth = 0;

  friend bool operator==(const VerifyStats&, const VerifyStats&) = default;
};

nlohmann::json to_json(const VerifyStats& s);

// Even counts take the mean of the two middle values. Empty -> nullopt.
std::optional<double> median(std::vector<double> values);

class VerifyService {
 public:
  // Replays the state dir and resumes unfinished jobs.
  VerifyService(VerifyConfig config, VerifyBackends backends);
  ~VerifyService();
  VerifyService(const VerifyService&) = delete;
  VerifyService& operator=(const VerifyService&) = delete;

  EnqueueResult enqueue_job(const fs::path& manifest_path);
  // Blocks until no job is being reconstructed.
  void wait_for_jobs();

  std::optional<ReviewItem> next_review(const std::string& reviewer_id);
  // Throws ContractError (verdict invariant), DataError (unknown item),
  // ConflictError (lease missing, expired, held by someone else, or item
  // already decided).
  ReviewItem submit_verdict(const std::string& item_id, Decision decision, Scenario scenario,
                            const std::string& reviewer_id);

  // Returns expired leases to the queue.
  void sweep();

  VerifyStats stats();
  ScoreTriple gold_eval(const std::vector<GoldLabel>& gold);
  // Manifest line-JSON in queue order.
  std::string export_manifest(bool accepted_only);

  std::optional<ReviewItem> item(const std::string& item_id);
  std::optional<Job> job(const std::string& job_id);
  std::vector<ReviewItem> items();
  // PNG bytes for a "sha256:<hex>" ref or bare hex digest.
  std::optional<std::string> image(std::string_view digest);

  std::size_t event_count();

 private:
  void append(nlohmann::json event);  // caller holds mu_
  void apply(const nlohmann::json& event);
  void replay();
  void write_snapshot();  // caller holds mu_
  void sweep_locked(double now);
  void run_jobs();
  void process_job(const std::string& job_id);
  fs::path image_path(std::string_view hex) const;
  std::string store_image(std::string_view png);

  VerifyConfig config_;
  VerifyBackends backends_;

  std::mutex mu_;
  std::FILE* log_ = nullptr;
  std::size_t events_ = 0;
  std::uint64_t next_seq_ = 0;
  std::map<std::string, Job> jobs_;
  std::map<std::string, ReviewItem> items_;
  std::map<std::uint64_t, std::string> queue_order_;  // seq -> item_id

  std::mutex job_mu_;
  std::condition_variable job_cv_;
  std::deque<std::string> pending_jobs_;
  bool busy_ = false;
  bool stopping_ = false;
  std::thread worker_;
};

}  // namespace capcheck

#endif  // CAPCHECK_VERIFY_HPP_
