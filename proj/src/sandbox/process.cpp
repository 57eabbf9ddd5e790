// Copyright 2026 The Taskbench Authors
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

#include "taskbench/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <map>

extern char** environ;

namespace taskbench::process {

namespace {

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    reset();
    fd_ = std::exchange(o.fd_, -1);
    return *this;
  }
  ~Fd() { reset(); }

  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

std::array<Fd, 2> make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw SpawnError(fmt::format("pipe: {}", std::strerror(errno)));
  }
  return {Fd(fds[0]), Fd(fds[1])};
}

// Splits a byte stream into lines, enforcing the shared output budget.
class LineBuffer {
 public:
  LineBuffer(Stream stream, const LineSink& sink, std::size_t& budget, bool& truncated)
      : stream_(stream), sink_(sink), budget_(budget), truncated_(truncated) {}

  void feed(const char* data, std::size_t n) {
    if (truncated_) return;
    if (n > budget_) {
      n = budget_;
      truncated_ = true;
    }
    budget_ -= n;
    pending_.append(data, n);
    std::size_t start = 0;
    while (true) {
      auto nl = pending_.find('\n', start);
      if (nl == std::string::npos) break;
      std::string_view line(pending_.data() + start, nl - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      sink_(stream_, line);
      start = nl + 1;
    }
    pending_.erase(0, start);
  }

  void finish() {
    if (!pending_.empty()) sink_(stream_, pending_);
    pending_.clear();
  }

 private:
  Stream stream_;
  const LineSink& sink_;
  std::size_t& budget_;
  bool& truncated_;
  std::string pending_;
};

void write_proc(const char* path, const std::string& value) {
  int fd = ::open(path, O_WRONLY | O_CLOEXEC);
  if (fd < 0) return;
  (void)!::write(fd, value.data(), value.size());
  ::close(fd);
}

// Everything the child needs, built before fork so the child never
// allocates (other threads may hold the allocator lock).
struct ChildPlan {
  std::vector<std::string> env_storage;
  std::vector<char*> argv;
  std::vector<char*> envp;
  std::string cwd;
  bool isolate = false;
  std::string uid_map;
  std::string gid_map;
};

ChildPlan plan_child(const Spec& spec) {
  ChildPlan plan;
  std::map<std::string, std::string> env;
  for (char** e = environ; *e != nullptr; ++e) {
    std::string_view kv(*e);
    auto eq = kv.find('=');
    if (eq != std::string_view::npos) env.emplace(kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& [k, v] : spec.env) env[k] = v;
  for (const auto& [k, v] : env) plan.env_storage.push_back(k + "=" + v);
  for (auto& kv : plan.env_storage) plan.envp.push_back(kv.data());
  plan.envp.push_back(nullptr);
  for (const auto& a : spec.argv) plan.argv.push_back(const_cast<char*>(a.c_str()));
  plan.argv.push_back(nullptr);
  plan.cwd = spec.cwd.string();
  plan.isolate = spec.isolate_network;
  plan.uid_map = fmt::format("{} {} 1", ::geteuid(), ::geteuid());
  plan.gid_map = fmt::format("{} {} 1", ::getegid(), ::getegid());
  return plan;
}

// Best effort; unprivileged sandboxes may refuse both paths. Without an id
// map the child would run as the overflow user and lose access to its files,
// so the user-namespace fallback maps the caller's own ids.
void isolate_network(const ChildPlan& plan) {
  if (::unshare(CLONE_NEWNET) == 0) return;
  if (::unshare(CLONE_NEWUSER | CLONE_NEWNET) != 0) return;
  write_proc("/proc/self/setgroups", "deny");
  write_proc("/proc/self/uid_map", plan.uid_map);
  write_proc("/proc/self/gid_map", plan.gid_map);
}

[[noreturn]] void child_exec(const ChildPlan& plan, int in_fd, int out_fd, int err_fd,
                             int status_fd) {
  ::setpgid(0, 0);
  if (plan.isolate) isolate_network(plan);
  ::dup2(in_fd, STDIN_FILENO);
  ::dup2(out_fd, STDOUT_FILENO);
  ::dup2(err_fd, STDERR_FILENO);
  if (!plan.cwd.empty() && ::chdir(plan.cwd.c_str()) != 0) {
    int err = errno;
    (void)!::write(status_fd, &err, sizeof err);
    ::_exit(127);
  }
  ::execvpe(plan.argv[0], plan.argv.data(), plan.envp.data());
  int err = errno;
  (void)!::write(status_fd, &err, sizeof err);
  ::_exit(127);
}

}  // namespace

Result run(const Spec& spec, const LineSink& sink) {
  if (spec.argv.empty()) throw SpawnError("empty argv");
  auto in = make_pipe();
  auto out = make_pipe();
  auto err = make_pipe();
  auto status = make_pipe();

  auto plan = plan_child(spec);
  const auto start = std::chrono::steady_clock::now();
  pid_t pid = ::fork();
  if (pid < 0) throw SpawnError(fmt::format("fork: {}", std::strerror(errno)));
  if (pid == 0) child_exec(plan, in[0].get(), out[1].get(), err[1].get(), status[1].get());

  ::setpgid(pid, pid);
  in[0].reset();
  out[1].reset();
  err[1].reset();
  status[1].reset();

  int exec_errno = 0;
  if (::read(status[0].get(), &exec_errno, sizeof exec_errno) == sizeof exec_errno) {
    ::waitpid(pid, nullptr, 0);
    throw SpawnError(fmt::format("cannot start {}: {}", spec.argv[0], std::strerror(exec_errno)));
  }

  Result result;
  std::size_t budget = spec.max_output_bytes;
  LineBuffer out_buf(Stream::Out, sink, budget, result.truncated);
  LineBuffer err_buf(Stream::Err, sink, budget, result.truncated);

  ::fcntl(in[1].get(), F_SETFL, O_NONBLOCK);
  std::size_t written = 0;
  if (spec.stdin_data.empty()) in[1].reset();

  const auto deadline = start + spec.timeout;
  std::array<char, 65536> buf;
  bool out_open = true, err_open = true;
  try {
  while (out_open || err_open) {
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      break;
    }
    std::array<pollfd, 3> fds{};
    nfds_t nfds = 0;
    int out_idx = -1, err_idx = -1, in_idx = -1;
    if (out_open) {
      out_idx = static_cast<int>(nfds);
      fds[nfds++] = {out[0].get(), POLLIN, 0};
    }
    if (err_open) {
      err_idx = static_cast<int>(nfds);
      fds[nfds++] = {err[0].get(), POLLIN, 0};
    }
    if (in[1].get() >= 0) {
      in_idx = static_cast<int>(nfds);
      fds[nfds++] = {in[1].get(), POLLOUT, 0};
    }
    auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    int rc = ::poll(fds.data(), nfds, static_cast<int>(std::min<long long>(wait_ms + 1, 1000)));
    if (rc < 0 && errno != EINTR) break;
    if (rc <= 0) continue;

    auto drain = [&](int idx, Fd& fd, LineBuffer& lb, bool& open) {
      if (idx < 0 || !(fds[idx].revents & (POLLIN | POLLHUP | POLLERR))) return;
      auto n = ::read(fd.get(), buf.data(), buf.size());
      if (n > 0) {
        lb.feed(buf.data(), static_cast<std::size_t>(n));
      } else if (n == 0 || (errno != EINTR && errno != EAGAIN)) {
        open = false;
      }
    };
    drain(out_idx, out[0], out_buf, out_open);
    drain(err_idx, err[0], err_buf, err_open);
    if (in_idx >= 0 && (fds[in_idx].revents & (POLLOUT | POLLERR | POLLHUP))) {
      auto n = ::write(in[1].get(), spec.stdin_data.data() + written, spec.stdin_data.size() - written);
      if (n > 0) written += static_cast<std::size_t>(n);
      if (n < 0 && errno != EAGAIN && errno != EINTR) written = spec.stdin_data.size();
      if (written >= spec.stdin_data.size()) in[1].reset();
    }
  }
  } catch (...) {
    ::killpg(pid, SIGKILL);
    ::waitpid(pid, nullptr, 0);
    throw;
  }

  int wstatus = 0;
  if (result.timed_out) {
    ::killpg(pid, SIGKILL);
    ::waitpid(pid, &wstatus, 0);
    result.exit_code = -1;
  } else {
    ::waitpid(pid, &wstatus, 0);
    if (WIFEXITED(wstatus)) {
      result.exit_code = WEXITSTATUS(wstatus);
    } else if (WIFSIGNALED(wstatus)) {
      result.exit_code = 128 + WTERMSIG(wstatus);
    }
    // Reap stragglers that kept the group alive.
    ::killpg(pid, SIGKILL);
  }
  out_buf.finish();
  err_buf.finish();
  result.duration_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace taskbench::process
