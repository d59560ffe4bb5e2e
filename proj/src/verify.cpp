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

#include "capcheck/verify.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <set>

#include "capcheck/digest.hpp"
#include "capcheck/error.hpp"
#include "capcheck/reconstructor.hpp"
#include "capcheck/sample.hpp"

namespace capcheck {
namespace {

nlohmann::json opt(const std::optional<std::string>& s) {
  return s ? nlohmann::json(*s) : nlohmann::json();
}

nlohmann::json verdict_to_json(const Verdict& v) {
  return {
      {"decision", std::string(to_string(v.decision))},
      {"scenario", std::string(to_string(v.scenario))},
      {"reviewer_id", v.reviewer_id},
      {"decision_seconds", v.decision_seconds},
      {"timestamp", v.timestamp},
  };
}

Verdict verdict_from_json(const nlohmann::json& j) {
  return {parse_decision(j.at("decision").get<std::string>()),
          parse_scenario(j.at("scenario").get<std::string>()),
          j.at("reviewer_id").get<std::string>(), j.at("decision_seconds").get<double>(),
          j.at("timestamp").get<double>()};
}

ReviewItem item_from_json(const nlohmann::json& j) {
  ReviewItem it;
  it.item_id = j.at("item_id").get<std::string>();
  it.job_id = j.at("job_id").get<std::string>();
  it.seq = j.at("seq").get<std::uint64_t>();
  it.sample_id = j.at("sample_id").get<std::string>();
  it.sample = j.at("sample");
  it.original_image_ref = j.at("original_image_ref").get<std::string>();
  if (const auto& r = j.at("reconstructed_image_ref"); !r.is_null()) {
    it.reconstructed_image_ref = r.get<std::string>();
  }
  it.caption = j.at("caption").get<std::string>();
  it.status = parse_item_status(j.at("status").get<std::string>());
  if (const auto& l = j.at("lease"); !l.is_null()) {
    it.lease = Lease{l.at("reviewer_id").get<std::string>(), l.at("granted_at").get<double>(),
                     l.at("expiry").get<double>()};
  }
  if (const auto& v = j.at("verdict"); !v.is_null()) it.verdict = verdict_from_json(v);
  it.attempts = j.value("attempts", 0);
  return it;
}

Job job_from_json(const nlohmann::json& j) {
  return {j.at("job_id").get<std::string>(),    j.at("manifest_path").get<std::string>(),
          j.at("manifest_digest").get<std::string>(), j.at("total").get<std::size_t>(),
          j.at("state").get<std::string>(),     j.value("error", std::string()),
          j.at("created_at").get<double>()};
}

std::string strip_ref(std::string_view ref) {
  if (ref.starts_with("sha256:")) ref.remove_prefix(7);
  return std::string(ref);
}

}  // namespace

std::string_view to_string(ItemStatus s) {
  switch (s) {
    case ItemStatus::kPending: return "pending";
    case ItemStatus::kLeased: return "leased";
    case ItemStatus::kAccepted: return "accepted";
    case ItemStatus::kRejected: return "rejected";
    case ItemStatus::kRenderFailed: return "render_failed";
  }
  return "pending";
}

std::string_view to_string(Decision d) { return d == Decision::kAccept ? "accept" : "reject"; }

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::kIncorrectCaption: return "A_incorrect_caption";
    case Scenario::kInsufficientDetail: return "B_insufficient_detail";
    case Scenario::kCodeError: return "C_code_error";
    case Scenario::kPass: return "D_pass";
  }
  return "D_pass";
}

ItemStatus parse_item_status(std::string_view s) {
  for (ItemStatus v : {ItemStatus::kPending, ItemStatus::kLeased, ItemStatus::kAccepted,
                       ItemStatus::kRejected, ItemStatus::kRenderFailed}) {
    if (to_string(v) == s) return v;
  }
  throw ValidationError("unknown item status '" + std::string(s) + "'");
}

Decision parse_decision(std::string_view s) {
  if (s == "accept") return Decision::kAccept;
  if (s == "reject") return Decision::kReject;
  throw ValidationError("decision must be 'accept' or 'reject', got '" + std::string(s) + "'");
}

Scenario parse_scenario(std::string_view s) {
  for (Scenario v : {Scenario::kIncorrectCaption, Scenario::kInsufficientDetail,
                     Scenario::kCodeError, Scenario::kPass}) {
    const std::string_view name = to_string(v);
    if (name == s || (s.size() == 1 && name.front() == s.front())) return v;
  }
  throw ValidationError("unknown scenario '" + std::string(s) + "'");
}

double SystemClock::now() const {
  return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void check_verdict(Decision decision, Scenario scenario) {
  if ((decision == Decision::kAccept) != (scenario == Scenario::kPass)) {
    throw ContractError("verdict '" + std::string(to_string(decision)) +
                        "' cannot carry scenario '" + std::string(to_string(scenario)) +
                        "': accept requires D_pass and reject requires A, B or C");
  }
}

nlohmann::json to_json(const ReviewItem& it) {
  nlohmann::json j = {
      {"item_id", it.item_id},
      {"job_id", it.job_id},
      {"seq", it.seq},
      {"sample_id", it.sample_id},
      {"sample", it.sample},
      {"original_image_ref", it.original_image_ref},
      {"reconstructed_image_ref", opt(it.reconstructed_image_ref)},
      {"original_image_url", "/images/" + strip_ref(it.original_image_ref)},
      {"reconstructed_image_url",
       it.reconstructed_image_ref
           ? nlohmann::json("/images/" + strip_ref(*it.reconstructed_image_ref))
           : nlohmann::json()},
      {"caption", it.caption},
      {"status", std::string(to_string(it.status))},
      {"lease", nullptr},
      {"verdict", nullptr},
      {"attempts", it.attempts},
  };
  if (it.lease) {
    j["lease"] = {{"reviewer_id", it.lease->reviewer_id},
                  {"granted_at", it.lease->granted_at},
                  {"expiry", it.lease->expiry}};
  }
  if (it.verdict) j["verdict"] = verdict_to_json(*it.verdict);
  return j;
}

nlohmann::json to_json(const Job& job) {
  return {
      {"job_id", job.job_id},         {"manifest_path", job.manifest_path},
      {"manifest_digest", job.manifest_digest}, {"total", job.total},
      {"state", job.state},           {"error", job.error},
      {"created_at", job.created_at},
  };
}

std::vector<GoldLabel> parse_gold(std::string_view text) {
  nlohmann::json rows = nlohmann::json::array();
  try {
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '[') {
      rows = nlohmann::json::parse(text);
    } else {
      std::size_t pos = 0;
      while (pos < text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        const auto line = text.substr(pos, end - pos);
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
          rows.push_back(nlohmann::json::parse(line));
        }
        pos = end + 1;
      }
    }
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("gold labels: ") + e.what());
  }
  std::vector<GoldLabel> out;
  std::set<std::string> seen;
  for (const auto& r : rows) {
    try {
      GoldLabel g{r.at("sample_id").get<std::string>(), r.at("caption_correct").get<bool>()};
      if (!seen.insert(g.sample_id).second) {
        throw ValidationError("gold labels: duplicate sample_id '" + g.sample_id + "'");
      }
      out.push_back(std::move(g));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("gold labels: ") + e.what());
    }
  }
  return out;
}

ScoreTriple gold_eval(const std::map<std::string, Decision>& decisions,
                      const std::vector<GoldLabel>& gold) {
  std::vector<std::string> missing;
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& g : gold) {
    auto it = decisions.find(g.sample_id);
    if (it == decisions.end()) {
      missing.push_back(g.sample_id);
      continue;
    }
    const bool accepted = it->second == Decision::kAccept;
    if (accepted && g.caption_correct) ++tp;
    if (accepted && !g.caption_correct) ++fp;
    if (!accepted && g.caption_correct) ++fn;
  }
  if (!missing.empty()) {
    std::string msg = "no final verdict for gold samples:";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }
  return score_from_counts(tp, tp + fp, tp + fn, gold.size());
}

nlohmann::json to_json(const VerifyStats& s) {
  auto o = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json();
  };
  return {
      {"by_status", s.by_status},
      {"by_scenario", s.by_scenario},
      {"human_verdicts", s.human_verdicts},
      {"median_decision_seconds", o(s.median_decision_seconds)},
      {"mean_decision_seconds", o(s.mean_decision_seconds)},
      {"queue_depth", s.queue_depth},
  };
}

std::optional<double> median(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

VerifyService::VerifyService(VerifyConfig config, VerifyBackends backends)
    : config_(std::move(config)), backends_(std::move(backends)) {
  if (config_.state_dir.empty()) throw ConfigError("verify service: state_dir is required");
  if (config_.lease_ttl_seconds <= 0) throw ConfigError("verify service: lease TTL must be > 0");
  if (!backends_.clock) backends_.clock = std::make_shared<SystemClock>();
  std::error_code ec;
  fs::create_directories(config_.state_dir / "images", ec);
  if (ec) throw IoError("cannot create state dir '" + config_.state_dir.string() + "'");
  replay();
  log_ = std::fopen((config_.state_dir / "events.jsonl").c_str(), "ab");
  if (!log_) throw IoError("cannot open event log in '" + config_.state_dir.string() + "'");

  for (const auto& [id, job] : jobs_) {
    if (job.state != "complete") pending_jobs_.push_back(id);
  }
  if (config_.background) {
    worker_ = std::thread([this] { run_jobs(); });
  } else {
    while (!pending_jobs_.empty()) {
      const std::string id = pending_jobs_.front();
      pending_jobs_.pop_front();
      process_job(id);
    }
  }
}

VerifyService::~VerifyService() {
  {
    std::lock_guard lock(job_mu_);
    stopping_ = true;
  }
  job_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
  if (log_) std::fclose(log_);
}

void VerifyService::replay() {
  const fs::path snap = config_.state_dir / "snapshot.json";
  const fs::path log = config_.state_dir / "events.jsonl";
  std::size_t skip = 0;
  std::error_code ec;
  if (fs::is_regular_file(snap, ec)) {
    const auto j = nlohmann::json::parse(read_file(snap));
    skip = j.at("events").get<std::size_t>();
    next_seq_ = j.at("next_seq").get<std::uint64_t>();
    for (const auto& jj : j.at("jobs")) {
      Job job = job_from_json(jj);
      jobs_[job.job_id] = job;
    }
    for (const auto& ij : j.at("items")) {
      ReviewItem it = item_from_json(ij);
      queue_order_[it.seq] = it.item_id;
      items_[it.item_id] = std::move(it);
    }
    events_ = skip;
  }
  if (!fs::is_regular_file(log, ec)) return;
  const std::string text = read_file(log);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      // A torn final write from a crash; drop it so later appends stay valid.
      fs::resize_file(log, pos);
      break;
    }
    const std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    if (++line_no <= skip) continue;
    nlohmann::json event;
    try {
      event = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw ParseError("event log line " + std::to_string(line_no) + " is corrupt");
    }
    apply(event);
    ++events_;
  }
}

void VerifyService::apply(const nlohmann::json& e) {
  const std::string type = e.at("type").get<std::string>();
  if (type == "job_created") {
    Job job = job_from_json(e.at("job"));
    jobs_[job.job_id] = job;
  } else if (type == "job_finished") {
    Job& job = jobs_.at(e.at("job_id").get<std::string>());
    job.state = e.at("state").get<std::string>();
    job.error = e.value("error", std::string());
  } else if (type == "job_resumed") {
    Job& job = jobs_.at(e.at("job_id").get<std::string>());
    job.state = "running";
    job.error.clear();
  } else if (type == "item_created") {
    ReviewItem it = item_from_json(e.at("item"));
    next_seq_ = std::max(next_seq_, it.seq + 1);
    queue_order_[it.seq] = it.item_id;
    items_[it.item_id] = std::move(it);
  } else if (type == "leased") {
    ReviewItem& it = items_.at(e.at("item_id").get<std::string>());
    it.status = ItemStatus::kLeased;
    it.lease = Lease{e.at("reviewer_id").get<std::string>(), e.at("granted_at").get<double>(),
                     e.at("expiry").get<double>()};
  } else if (type == "lease_expired") {
    ReviewItem& it = items_.at(e.at("item_id").get<std::string>());
    it.status = ItemStatus::kPending;
    it.lease.reset();
  } else if (type == "verdict") {
    ReviewItem& it = items_.at(e.at("item_id").get<std::string>());
    it.verdict = verdict_from_json(e.at("verdict"));
    if (it.status != ItemStatus::kRenderFailed) {
      it.status = it.verdict->decision == Decision::kAccept ? ItemStatus::kAccepted
                                                            : ItemStatus::kRejected;
    }
  } else {
    throw ParseError("unknown event type '" + type + "'");
  }
}

void VerifyService::append(nlohmann::json event) {
  const std::string line = event.dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), log_) != line.size() || std::fflush(log_) != 0 ||
      ::fsync(::fileno(log_)) != 0) {
    throw IoError("cannot append to the event log");
  }
  apply(event);
  ++events_;
  if (config_.snapshot_every > 0 && events_ % config_.snapshot_every == 0) write_snapshot();
}

void VerifyService::write_snapshot() {
  nlohmann::json jobs = nlohmann::json::array();
  for (const auto& [id, job] : jobs_) jobs.push_back(to_json(job));
  nlohmann::json items = nlohmann::json::array();
  for (const auto& [seq, id] : queue_order_) items.push_back(to_json(items_.at(id)));
  write_file_atomic(config_.state_dir / "snapshot.json",
                    nlohmann::json{{"events", events_},
                                   {"next_seq", next_seq_},
                                   {"jobs", jobs},
                                   {"items", items}}
                        .dump());
}

fs::path VerifyService::image_path(std::string_view hex) const {
  return config_.state_dir / "images" / (std::string(hex) + ".png");
}

std::string VerifyService::store_image(std::string_view png) {
  const std::string hex = content_hash(png).hex();
  const fs::path p = image_path(hex);
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) write_file_atomic(p, png);
  return "sha256:" + hex;
}

EnqueueResult VerifyService::enqueue_job(const fs::path& manifest_path) {
  const Manifest manifest = load_manifest(manifest_path);
  if (manifest.samples.empty()) throw ValidationError("manifest has no samples");
  std::string job_id = "job-" + manifest.digest.hex().substr(0, 16);
  {
    std::lock_guard lock(mu_);
    if (auto it = jobs_.find(job_id); it != jobs_.end()) {
      if (it->second.state == "failed") {
        append({{"type", "job_resumed"}, {"job_id", job_id}});
        std::lock_guard jl(job_mu_);
        pending_jobs_.push_back(job_id);
      } else {
        return {job_id, false};
      }
    } else {
      Job job{job_id,
              fs::absolute(manifest_path).string(),
              manifest.digest.hex(),
              manifest.samples.size(),
              "running",
              "",
              backends_.clock->now()};
      append({{"type", "job_created"}, {"job", to_json(job)}});
      std::lock_guard jl(job_mu_);
      pending_jobs_.push_back(job_id);
    }
  }
  if (config_.background) {
    job_cv_.notify_all();
  } else {
    std::unique_lock jl(job_mu_);
    while (!pending_jobs_.empty()) {
      const std::string id = pending_jobs_.front();
      pending_jobs_.pop_front();
      jl.unlock();
      process_job(id);
      jl.lock();
    }
  }
  return {job_id, true};
}

void VerifyService::wait_for_jobs() {
  std::unique_lock lock(job_mu_);
  job_cv_.wait(lock, [&] { return (pending_jobs_.empty() && !busy_) || stopping_; });
}

void VerifyService::run_jobs() {
  std::unique_lock lock(job_mu_);
  while (true) {
    job_cv_.wait(lock, [&] { return stopping_ || !pending_jobs_.empty(); });
    if (stopping_) return;
    const std::string id = pending_jobs_.front();
    pending_jobs_.pop_front();
    busy_ = true;
    lock.unlock();
    try {
      process_job(id);
    } catch (...) {
      // process_job records its own failures; nothing else may escape.
    }
    lock.lock();
    busy_ = false;
    job_cv_.notify_all();
  }
}

void VerifyService::process_job(const std::string& job_id) {
  Job job;
  std::set<std::string> done;
  {
    std::lock_guard lock(mu_);
    job = jobs_.at(job_id);
    for (const auto& [id, it] : items_) {
      if (it.job_id == job_id) done.insert(it.sample_id);
    }
  }
  auto finish = [&](const std::string& state, const std::string& error) {
    std::lock_guard lock(mu_);
    append({{"type", "job_finished"}, {"job_id", job_id}, {"state", state}, {"error", error}});
  };
  try {
    if (!backends_.text || !backends_.runner || !backends_.prompts) {
      throw ConfigError("verify service has no reconstruction backends configured");
    }
    const Manifest manifest = load_manifest(job.manifest_path);
    if (manifest.digest.hex() != job.manifest_digest) {
      throw DataError("manifest '" + job.manifest_path + "' changed since it was enqueued");
    }
    for (const auto& sample : manifest.samples) {
      {
        std::lock_guard jl(job_mu_);
        if (stopping_) return;
      }
      if (done.contains(sample.id)) continue;
      const std::string original = read_file(capcheck::image_path(manifest, sample));
      const Reconstruction rec = reconstruct(sample, *backends_.text, *backends_.runner,
                                             *backends_.prompts, config_.max_attempts);
      ReviewItem it;
      it.item_id = "it-" + content_hash_parts({job_id, sample.id}).hex().substr(0, 16);
      it.job_id = job_id;
      it.sample_id = sample.id;
      nlohmann::json s = to_json(sample);
      s["image"] = fs::absolute(capcheck::image_path(manifest, sample)).string();
      it.sample = s;
      it.original_image_ref = store_image(original);
      it.caption = sample.caption;
      it.attempts = static_cast<int>(rec.attempts.size());
      if (rec.succeeded()) it.reconstructed_image_ref = store_image(rec.image_png);
      const bool auto_reject = !rec.succeeded() && !config_.route_render_failures_to_review;
      it.status = auto_reject ? ItemStatus::kRenderFailed : ItemStatus::kPending;

      std::lock_guard lock(mu_);
      it.seq = next_seq_;
      const std::string item_id = it.item_id;
      append({{"type", "item_created"}, {"item", to_json(it)}});
      if (auto_reject) {
        const double now = backends_.clock->now();
        append({{"type", "verdict"},
                {"item_id", item_id},
                {"verdict", verdict_to_json({Decision::kReject, Scenario::kCodeError,
                                             std::string(kSystemReviewer), 0.0, now})}});
      }
    }
    finish("complete", "");
  } catch (const std::exception& e) {
    finish("failed", e.what());
  }
}

void VerifyService::sweep_locked(double now) {
  for (const auto& [seq, id] : queue_order_) {
    const ReviewItem& it = items_.at(id);
    if (it.status == ItemStatus::kLeased && it.lease && it.lease->expiry <= now) {
      append({{"type", "lease_expired"}, {"item_id", id}, {"at", now}});
    }
  }
}

void VerifyService::sweep() {
  std::lock_guard lock(mu_);
  sweep_locked(backends_.clock->now());
}

std::optional<ReviewItem> VerifyService::next_review(const std::string& reviewer_id) {
  if (reviewer_id.empty()) throw ValidationError("reviewer id is required");
  std::lock_guard lock(mu_);
  const double now = backends_.clock->now();
  sweep_locked(now);
  for (const auto& [seq, id] : queue_order_) {
    const ReviewItem& it = items_.at(id);
    if (it.status == ItemStatus::kLeased && it.lease->reviewer_id == reviewer_id) return it;
  }
  for (const auto& [seq, id] : queue_order_) {
    if (items_.at(id).status != ItemStatus::kPending) continue;
    append({{"type", "leased"},
            {"item_id", id},
            {"reviewer_id", reviewer_id},
            {"granted_at", now},
            {"expiry", now + config_.lease_ttl_seconds}});
    return items_.at(id);
  }
  return std::nullopt;
}

ReviewItem VerifyService::submit_verdict(const std::string& item_id, Decision decision,
                                         Scenario scenario, const std::string& reviewer_id) {
  check_verdict(decision, scenario);
  if (reviewer_id.empty()) throw ValidationError("reviewer id is required");
  if (reviewer_id == kSystemReviewer) {
    throw ContractError("reviewer id '" + reviewer_id + "' is reserved");
  }
  std::lock_guard lock(mu_);
  auto found = items_.find(item_id);
  if (found == items_.end()) throw DataError("unknown item '" + item_id + "'");
  const ReviewItem& it = found->second;
  if (it.verdict) throw ConflictError("item '" + item_id + "' has already been decided");
  const double now = backends_.clock->now();
  if (it.status == ItemStatus::kLeased && it.lease->expiry <= now) {
    append({{"type", "lease_expired"}, {"item_id", item_id}, {"at", now}});
    throw ConflictError("lease on item '" + item_id + "' has expired");
  }
  if (it.status != ItemStatus::kLeased) {
    throw ConflictError("item '" + item_id + "' is not leased");
  }
  if (it.lease->reviewer_id != reviewer_id) {
    throw ConflictError("item '" + item_id + "' is leased to another reviewer");
  }
  append({{"type", "verdict"},
          {"item_id", item_id},
          {"verdict", verdict_to_json({decision, scenario, reviewer_id,
                                       now - it.lease->granted_at, now})}});
  return items_.at(item_id);
}

VerifyStats VerifyService::stats() {
  std::lock_guard lock(mu_);
  sweep_locked(backends_.clock->now());
  VerifyStats s;
  for (ItemStatus v : {ItemStatus::kPending, ItemStatus::kLeased, ItemStatus::kAccepted,
                       ItemStatus::kRejected, ItemStatus::kRenderFailed}) {
    s.by_status[std::string(to_string(v))] = 0;
  }
  for (Scenario v : {Scenario::kIncorrectCaption, Scenario::kInsufficientDetail,
                     Scenario::kCodeError, Scenario::kPass}) {
    s.by_scenario[std::string(to_string(v))] = 0;
  }
  std::vector<double> times;
  for (const auto& [id, it] : items_) {
    ++s.by_status[std::string(to_string(it.status))];
    if (it.status == ItemStatus::kPending) ++s.queue_depth;
    if (!it.verdict) continue;
    ++s.by_scenario[std::string(to_string(it.verdict->scenario))];
    if (it.verdict->reviewer_id != kSystemReviewer) times.push_back(it.verdict->decision_seconds);
  }
  s.human_verdicts = times.size();
  s.median_decision_seconds = median(times);
  if (!times.empty()) {
    std::sort(times.begin(), times.end());
    double sum = 0;
    for (double t : times) sum += t;
    s.mean_decision_seconds = sum / static_cast<double>(times.size());
  }
  return s;
}

ScoreTriple VerifyService::gold_eval(const std::vector<GoldLabel>& gold) {
  std::map<std::string, Decision> decisions;
  {
    std::lock_guard lock(mu_);
    // Later items for the same sample supersede earlier ones.
    for (const auto& [seq, id] : queue_order_) {
      const ReviewItem& it = items_.at(id);
      if (it.verdict) decisions[it.sample_id] = it.verdict->decision;
    }
  }
  return capcheck::gold_eval(decisions, gold);
}

std::string VerifyService::export_manifest(bool accepted_only) {
  std::lock_guard lock(mu_);
  std::string out;
  for (const auto& [seq, id] : queue_order_) {
    const ReviewItem& it = items_.at(id);
    if (accepted_only && it.status != ItemStatus::kAccepted) continue;
    out += it.sample.dump() + "\n";
  }
  return out;
}

std::optional<ReviewItem> VerifyService::item(const std::string& item_id) {
  std::lock_guard lock(mu_);
  auto it = items_.find(item_id);
  if (it == items_.end()) return std::nullopt;
  return it->second;
}

std::optional<Job> VerifyService::job(const std::string& job_id) {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

std::vector<ReviewItem> VerifyService::items() {
  std::lock_guard lock(mu_);
  std::vector<ReviewItem> out;
  for (const auto& [seq, id] : queue_order_) out.push_back(items_.at(id));
  return out;
}

std::optional<std::string> VerifyService::image(std::string_view digest) {
  const std::string hex = strip_ref(digest);
  if (!is_hex_digest(hex)) return std::nullopt;
  const fs::path p = image_path(hex);
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) return std::nullopt;
  return read_file(p);
}

std::size_t VerifyService::event_count() {
  std::lock_guard lock(mu_);
  return events_;
}

}  // namespace capcheck
