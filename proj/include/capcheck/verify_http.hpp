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

#ifndef CAPCHECK_VERIFY_HTTP_HPP_
#define CAPCHECK_VERIFY_HTTP_HPP_

#include <memory>
#include <string>
#include <thread>

#include "capcheck/verify.hpp"

namespace httplib {
class Server;
}

namespace capcheck {

// JSON API over a VerifyService:
//
//   POST /jobs                 {"manifest_path"}  -> 201 {"job_id"}, 409 if known
//   GET  /jobs/<id>                               -> job
//   GET  /review/next?reviewer=<id>               -> 200 item, 204 when empty
//   POST /review/<item_id>     {"decision", "scenario", "reviewer"}
//                                                 -> 200 item, 409 conflict
//   GET  /stats                                   -> statistics
//   GET  /export?accepted_only=true               -> manifest line-JSON
//   POST /gold-eval            {"gold_path"}      -> {"precision", "recall", "f1", "n"}
//   GET  /images/<digest>                         -> image/png
//
// Errors are {"error": message}: 400 malformed request, 404 unknown id,
// 409 conflict, 422 contract or data violation, 500 otherwise.
class VerifyServer {
 public:
  explicit VerifyServer(VerifyService& service, double sweep_interval_seconds = 5.0);
  ~VerifyServer();
  VerifyServer(const VerifyServer&) = delete;
  VerifyServer& operator=(const VerifyServer&) = delete;

  // Binds (port 0 picks a free port) and serves on a background thread.
  // Returns the bound port; throws IoError if binding fails.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks until the server stops.
  void wait();
  void stop();

 private:
  void routes();

  VerifyService& service_;
  double sweep_interval_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::thread sweeper_;
  std::mutex stop_mu_;
  std::condition_variable stop_cv_;
  bool stopped_ = false;
};

}  // namespace capcheck

#endif  // CAPCHECK_VERIFY_HTTP_HPP_
