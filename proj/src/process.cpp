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

#include "capcheck/process.hpp"

#include <fcntl.h>
#include <sched.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <thread>

#include "capcheck/error.hpp"

namespace capcheck {
namespace {

// Status bytes the child sends through the CLOEXEC pipe before exec.
constexpr char kNetIsolated = 'N';
constexpr char kNetShared = 'n';
constexpr char kExecFailed = 'E';

std::string find_in_path(const std::string& name, const char* path_env) {
  if (name.find('/') != std::string::npos) return name;
  std::string path = path_env ? path_env : "/usr/local/bin:/usr/bin:/bin";
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t end = path.find(':', start);
    if (end == std::string::npos) end = path.size();
    std::string dir = path.substr(start, end - start);
    if (!dir.empty()) {
      std::string candidate = dir + "/" + name;
      if (::access(candidate.c_str(), X_OK) == 0) return candidate;
    }
    start = end + 1;
  }
  return {};
}

void write_byte(int fd, char c) {
  while (::write(fd, &c, 1) < 0 && errno == EINTR) {
  }
}

[[noreturn]] void child_fail(int fd, int err) {
  write_byte(fd, kExecFailed);
  while (::write(fd, &err, sizeof err) < 0 && errno == EINTR) {
  }
  ::_exit(127);
}

}  // namespace

ProcessResult run_process(const ProcessSpec& spec) {
  ProcessResult result;
  if (spec.argv.empty()) {
    result.spawn_error = "empty argv";
    return result;
  }

  // Everything the child touches is prepared before fork().
  const char* parent_path = std::getenv("PATH");
  for (const auto& e : spec.env) {
    if (e.rfind("PATH=", 0) == 0) parent_path = e.c_str() + 5;
  }
  const std::string exe = find_in_path(spec.argv[0], parent_path);
  if (exe.empty()) {
    result.spawn_error = "executable not found: " + spec.argv[0];
    return result;
  }
  std::vector<char*> argv;
  for (const auto& a : spec.argv) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  std::vector<char*> envp;
  for (const auto& e : spec.env) envp.push_back(const_cast<char*>(e.c_str()));
  envp.push_back(nullptr);
  const std::string cwd = spec.cwd.string();
  const std::string out_path = spec.stdout_path.string();
  const std::string err_path = spec.stderr_path.string();

  int pipefd[2];
  if (::pipe2(pipefd, O_CLOEXEC) != 0) {
    result.spawn_error = std::string("pipe: ") + std::strerror(errno);
    return result;
  }

  const auto start = std::chrono::steady_clock::now();
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(pipefd[0]);
    ::close(pipefd[1]);
    result.spawn_error = std::string("fork: ") + std::strerror(errno);
    return result;
  }
  if (pid == 0) {
    ::close(pipefd[0]);
    ::setpgid(0, 0);
    int in = ::open("/dev/null", O_RDONLY);
    int out = ::open(out_path.empty() ? "/dev/null" : out_path.c_str(),
                     O_WRONLY | O_CREAT | O_TRUNC, 0644);
    int err = ::open(err_path.empty() ? "/dev/null" : err_path.c_str(),
                     O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (in < 0 || out < 0 || err < 0) child_fail(pipefd[1], errno);
    ::dup2(in, 0);
    ::dup2(out, 1);
    ::dup2(err, 2);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) child_fail(pipefd[1], errno);
    if (spec.address_space_limit) {
      struct rlimit rl;
      rl.rlim_cur = rl.rlim_max = static_cast<rlim_t>(*spec.address_space_limit);
      if (::setrlimit(RLIMIT_AS, &rl) != 0) child_fail(pipefd[1], errno);
    }
    if (spec.isolate_network) {
      write_byte(pipefd[1], ::unshare(CLONE_NEWNET) == 0 ? kNetIsolated : kNetShared);
    }
    ::execve(exe.c_str(), argv.data(), envp.data());
    child_fail(pipefd[1], errno);
  }

  ::close(pipefd[1]);
  // Blocks until exec succeeds (EOF via CLOEXEC) or the child reports.
  std::string status;
  char buf[64];
  for (;;) {
    ssize_t n = ::read(pipefd[0], buf, sizeof buf);
    if (n > 0) {
      status.append(buf, static_cast<std::size_t>(n));
    } else if (n == 0 || errno != EINTR) {
      break;
    }
  }
  ::close(pipefd[0]);
  result.network_isolated = status.find(kNetIsolated) != std::string::npos;
  if (auto pos = status.find(kExecFailed); pos != std::string::npos) {
    int err = 0;
    if (status.size() >= pos + 1 + sizeof err) {
      std::memcpy(&err, status.data() + pos + 1, sizeof err);
    }
    int wstatus;
    ::waitpid(pid, &wstatus, 0);
    result.spawn_error = "cannot start " + exe + ": " + std::strerror(err);
    return result;
  }
  result.started = true;

  const auto deadline =
      start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                  std::chrono::duration<double>(spec.timeout_seconds));
  int wstatus = 0;
  auto sleep = std::chrono::milliseconds(1);
  for (;;) {
    pid_t r = ::waitpid(pid, &wstatus, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) break;
    if (spec.timeout_seconds > 0 && std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &wstatus, 0);
      result.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(sleep);
    sleep = std::min(sleep * 2, std::chrono::milliseconds(20));
  }
  // Reap any stragglers left in the group.
  ::kill(-pid, SIGKILL);
  result.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (WIFEXITED(wstatus)) result.exit_code = WEXITSTATUS(wstatus);
  if (WIFSIGNALED(wstatus)) result.term_signal = WTERMSIG(wstatus);
  return result;
}

std::string read_tail(const fs::path& path, std::size_t max_bytes) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) return {};
  const auto size = static_cast<std::size_t>(in.tellg());
  const std::size_t n = std::min(size, max_bytes);
  in.seekg(static_cast<std::streamoff>(size - n));
  std::string out(n, '\0');
  in.read(out.data(), static_cast<std::streamsize>(n));
  return out;
}

fs::path make_temp_dir(const fs::path& parent, std::string_view prefix) {
  static std::atomic<unsigned> counter{0};
  const fs::path base = parent.empty() ? fs::temp_directory_path() : parent;
  fs::create_directories(base);
  std::random_device rd;
  for (int i = 0; i < 100; ++i) {
    fs::path p = base / (std::string(prefix) + std::to_string(::getpid()) + "-" +
                         std::to_string(counter.fetch_add(1)) + "-" +
                         std::to_string(rd() % 1000000));
    std::error_code ec;
    if (fs::create_directory(p, ec)) return p;
  }
  throw IoError("cannot create temporary directory under " + base.string());
}

TempDir::TempDir(const fs::path& parent, std::string_view prefix)
    : path_(make_temp_dir(parent, prefix)) {}

TempDir::~TempDir() {
  if (keep_) return;
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string run_and_capture(const std::vector<std::string>& argv,
                            double timeout_seconds) {
  TempDir tmp;
  ProcessSpec spec;
  spec.argv = argv;
  for (char** e = environ; e && *e; ++e) spec.env.emplace_back(*e);
  spec.cwd = fs::current_path();
  spec.stdout_path = tmp.path() / "stdout";
  spec.stderr_path = tmp.path() / "stderr";
  spec.timeout_seconds = timeout_seconds;
  ProcessResult r = run_process(spec);
  const std::string cmd = argv.empty() ? std::string() : argv[0];
  if (!r.started) throw BackendUnavailable(r.spawn_error);
  if (r.timed_out) throw BackendUnavailable(cmd + " timed out");
  if (r.exit_code != 0) {
    throw BackendUnavailable(cmd + " exited with status " +
                             std::to_string(r.exit_code) + ": " +
                             read_tail(spec.stderr_path, 2048));
  }
  return read_file(spec.stdout_path);
}

}  // namespace capcheck
