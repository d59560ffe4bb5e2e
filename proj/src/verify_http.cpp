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

#include "capcheck/verify_http.hpp"

#include "capcheck/error.hpp"
#include "httplib.h"

namespace capcheck {
namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view message) {
  send_json(res, status, {{"error", message}});
}

nlohmann::json parse_body(const httplib::Request& req) {
  try {
    auto j = nlohmann::json::parse(req.body);
    if (!j.is_object()) throw ValidationError("request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error&) {
    throw ValidationError("request body is not valid JSON");
  }
}

std::string required_string(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw ValidationError(std::string("field \"") + key + "\" is required");
  }
  return it->get<std::string>();
}

// Maps library errors onto status codes.
template <typename Fn>
auto guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const ConflictError& e) {
      send_error(res, 409, e.what());
    } catch (const ValidationError& e) {
      send_error(res, 400, e.what());
    } catch (const ParseError& e) {
      send_error(res, 400, e.what());
    } catch (const IoError& e) {
      send_error(res, 400, e.what());
    } catch (const ContractError& e) {
      send_error(res, 422, e.what());
    } catch (const DataError& e) {
      send_error(res, 422, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

}  // namespace

VerifyServer::VerifyServer(VerifyService& service, double sweep_interval_seconds)
    : service_(service),
      sweep_interval_(sweep_interval_seconds),
      server_(std::make_unique<httplib::Server>()) {
  routes();
}

VerifyServer::~VerifyServer() { stop(); }

void VerifyServer::routes() {
  auto& s = *server_;
  // The review UI may be served from another origin.
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  s.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  s.Post("/jobs", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto r = service_.enqueue_job(required_string(body, "manifest_path"));
    if (r.created) {
      send_json(res, 201, {{"job_id", r.job_id}});
    } else {
      send_json(res, 409, {{"job_id", r.job_id}, {"error", "manifest already enqueued"}});
    }
  }));

  s.Get(R"(/jobs/([A-Za-z0-9_-]+))",
        guarded([this](const httplib::Request& req, httplib::Response& res) {
          auto job = service_.job(req.matches[1]);
          if (!job) return send_error(res, 404, "unknown job");
          send_json(res, 200, to_json(*job));
        }));

  s.Get("/review/next", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string reviewer = req.get_param_value("reviewer");
    if (reviewer.empty()) throw ValidationError("query parameter \"reviewer\" is required");
    auto item = service_.next_review(reviewer);
    if (!item) {
      res.status = 204;
      return;
    }
    send_json(res, 200, to_json(*item));
  }));

  s.Post(R"(/review/([A-Za-z0-9_-]+))",
         guarded([this](const httplib::Request& req, httplib::Response& res) {
           const auto body = parse_body(req);
           const Decision decision = parse_decision(required_string(body, "decision"));
           const Scenario scenario = parse_scenario(required_string(body, "scenario"));
           const std::string item_id = req.matches[1];
           if (!service_.item(item_id)) return send_error(res, 404, "unknown item");
           send_json(res, 200,
                     to_json(service_.submit_verdict(item_id, decision, scenario,
                                                     required_string(body, "reviewer"))));
         }));

  s.Get("/stats", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, to_json(service_.stats()));
  }));

  s.Get("/export", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string flag = req.get_param_value("accepted_only");
    res.set_content(service_.export_manifest(flag == "true" || flag == "1"),
                    "application/x-ndjson");
  }));

  s.Post("/gold-eval", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto gold = parse_gold(read_file(required_string(body, "gold_path")));
    send_json(res, 200, to_json(service_.gold_eval(gold)));
  }));

  s.Get(R"(/images/(?:sha256:)?([0-9a-f]{64}))",
        guarded([this](const httplib::Request& req, httplib::Response& res) {
          auto png = service_.image(req.matches[1].str());
          if (!png) return send_error(res, 404, "unknown image");
          res.set_header("Cache-Control", "public, max-age=31536000, immutable");
          res.set_content(*png, "image/png");
        }));
}

int VerifyServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  if (sweep_interval_ > 0) {
    sweeper_ = std::thread([this] {
      std::unique_lock lock(stop_mu_);
      while (!stop_cv_.wait_for(lock, std::chrono::duration<double>(sweep_interval_),
                                [&] { return stopped_; })) {
        lock.unlock();
        try {
          service_.sweep();
        } catch (...) {
        }
        lock.lock();
      }
    });
  }
  return bound;
}

void VerifyServer::wait() {
  if (thread_.joinable()) thread_.join();
}

void VerifyServer::stop() {
  {
    std::lock_guard lock(stop_mu_);
    if (stopped_) return;
    stopped_ = true;
  }
  stop_cv_.notify_all();
  server_->stop();
  if (thread_.joinable()) thread_.join();
  if (sweeper_.joinable()) sweeper_.join();
}

}  // namespace capcheck
