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

#ifndef CAPCHECK_TEXT_BACKEND_HPP_
#define CAPCHECK_TEXT_BACKEND_HPP_

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace capcheck {

struct TextRequest {
  std::string prompt;
  std::optional<std::string> system;
  int max_output_tokens = 4096;

  friend bool operator==(const TextRequest&, const TextRequest&) = default;
};

// A text-generation service. Implementations throw TransportError for
// failures that may succeed on retry.
class TextBackend {
 public:
  virtual ~TextBackend() = default;
  virtual std::string id() const = 0;
  virtual std::string complete(const TextRequest& request) = 0;
};

// In-process backend replaying scripted responses. Every request is kept in
// a transcript so tests can assert on exact request bodies.
class ScriptedBackend : public TextBackend {
 public:
  // Receives the request and its 0-based position in the transcript.
  using Responder = std::function<std::string(const TextRequest&, std::size_t)>;

  ScriptedBackend(std::string id, Responder responder);

  // Returns responses in order; a call past the end throws ContractError.
  static std::unique_ptr<ScriptedBackend> Sequence(std::vector<std::string> responses,
                                                   std::string id = "mock:sequence");

  // Rule transcript, as used by the CLI's "mock" backend:
  //   {"id": "...", "rules": [{"match": "substring", "responses": ["..", ".."]}],
  //    "default": ".."}
  // The first rule whose `match` occurs in the prompt answers with its next
  // response; the final response repeats once a rule is exhausted.
  static std::unique_ptr<ScriptedBackend> FromTranscript(const nlohmann::json& j);

  std::string id() const override { return id_; }
  std::string complete(const TextRequest& request) override;

  std::vector<TextRequest> transcript() const;
  std::size_t calls() const;

 private:
  std::string id_;
  Responder responder_;
  mutable std::mutex mu_;
  std::vector<TextRequest> transcript_;
};

struct HttpBackendConfig {
  std::string base_url;  // e.g. http://localhost:8000
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key_env = "CAPCHECK_API_KEY";
  double temperature = 0.0;
  double timeout_seconds = 120.0;
};

// OpenAI-style chat-completions client.
class HttpBackend : public TextBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  std::string id() const override { return "http:" + config_.model; }
  std::string complete(const TextRequest& request) override;

 private:
  HttpBackendConfig config_;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_factor = 2.0;
  // Minimum spacing between requests across all callers; 0 disables.
  double max_requests_per_second = 0.0;
};

// Decorator adding transport retries with exponential backoff and a shared
// request-rate ceiling.
class RetryingBackend : public TextBackend {
 public:
  RetryingBackend(std::shared_ptr<TextBackend> inner, RetryPolicy policy);
  std::string id() const override { return inner_->id(); }
  std::string complete(const TextRequest& request) override;

 private:
  void throttle();

  std::shared_ptr<TextBackend> inner_;
  RetryPolicy policy_;
  std::mutex rate_mu_;
  std::chrono::steady_clock::time_point next_slot_{};
};

}  // namespace capcheck

#endif  // CAPCHECK_TEXT_BACKEND_HPP_
