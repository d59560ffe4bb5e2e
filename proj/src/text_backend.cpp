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

#include "capcheck/text_backend.hpp"

#include <cstdlib>
#include <thread>

#include "capcheck/error.hpp"
#include "httplib.h"

namespace capcheck {

ScriptedBackend::ScriptedBackend(std::string id, Responder responder)
    : id_(std::move(id)), responder_(std::move(responder)) {}

std::unique_ptr<ScriptedBackend> ScriptedBackend::Sequence(
    std::vector<std::string> responses, std::string id) {
  return std::make_unique<ScriptedBackend>(
      std::move(id),
      [responses = std::move(responses)](const TextRequest&, std::size_t i) {
        if (i >= responses.size()) {
          throw ContractError("scripted backend exhausted after " +
                              std::to_string(responses.size()) + " responses");
        }
        return responses[i];
      });
}

std::unique_ptr<ScriptedBackend> ScriptedBackend::FromTranscript(
    const nlohmann::json& j) {
  struct Rule {
    std::string match;
    std::vector<std::string> responses;
    std::size_t next = 0;
  };
  auto rules = std::make_shared<std::vector<Rule>>();
  for (const auto& r : j.value("rules", nlohmann::json::array())) {
    Rule rule{r.at("match").get<std::string>(),
              r.at("responses").get<std::vector<std::string>>()};
    if (rule.responses.empty()) {
      throw ConfigError("mock rule '" + rule.match + "' has no responses");
    }
    rules->push_back(std::move(rule));
  }
  std::optional<std::string> fallback;
  if (j.contains("default")) fallback = j.at("default").get<std::string>();
  // ScriptedBackend serializes calls, so the shared rule state needs no lock.
  return std::make_unique<ScriptedBackend>(
      j.value("id", std::string("mock:transcript")),
      [rules, fallback](const TextRequest& req, std::size_t) -> std::string {
        for (auto& rule : *rules) {
          if (req.prompt.find(rule.match) != std::string::npos) {
            const std::string& out =
                rule.responses[std::min(rule.next, rule.responses.size() - 1)];
            ++rule.next;
            return out;
          }
        }
        if (fallback) return *fallback;
        throw ContractError("mock transcript has no rule matching the request");
      });
}

std::string ScriptedBackend::complete(const TextRequest& request) {
  std::lock_guard lock(mu_);
  transcript_.push_back(request);
  return responder_(request, transcript_.size() - 1);
}

std::vector<TextRequest> ScriptedBackend::transcript() const {
  std::lock_guard lock(mu_);
  return transcript_;
}

std::size_t ScriptedBackend::calls() const {
  std::lock_guard lock(mu_);
  return transcript_.size();
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw ConfigError("http backend: base_url is empty");
  if (config_.model.empty()) throw ConfigError("http backend: model is empty");
}

std::string HttpBackend::complete(const TextRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  if (request.system) {
    messages.push_back({{"role", "system"}, {"content", *request.system}});
  }
  messages.push_back({{"role", "user"}, {"content", request.prompt}});
  nlohmann::json body = {
      {"model", config_.model},
      {"messages", messages},
      {"temperature", config_.temperature},
      {"max_tokens", request.max_output_tokens},
  };

  httplib::Client client(config_.base_url);
  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  auto res = client.Post(config_.path, headers, body.dump(), "application/json");
  if (!res) {
    throw TransportError("text backend request to " + config_.base_url +
                         " failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw TransportError("text backend returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw GenerationError("text backend returned HTTP " +
                          std::to_string(res->status) + ": " + res->body);
  }
  try {
    auto j = nlohmann::json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw GenerationError(std::string("malformed text backend response: ") + e.what());
  }
}

RetryingBackend::RetryingBackend(std::shared_ptr<TextBackend> inner,
                                 RetryPolicy policy)
    : inner_(std::move(inner)), policy_(policy) {}

void RetryingBackend::throttle() {
  if (policy_.max_requests_per_second <= 0) return;
  const auto spacing = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / policy_.max_requests_per_second));
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(rate_mu_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_slot_);
    next_slot_ = slot + spacing;
  }
  std::this_thread::sleep_until(slot);
}

std::string RetryingBackend::complete(const TextRequest& request) {
  auto backoff = std::chrono::duration<double, std::milli>(policy_.initial_backoff);
  for (int attempt = 0;; ++attempt) {
    throttle();
    try {
      return inner_->complete(request);
    } catch (const TransportError&) {
      if (attempt >= policy_.max_retries) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= policy_.backoff_factor;
  }
}

}  // namespace capcheck
