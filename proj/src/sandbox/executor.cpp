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

#include "taskbench/executor.hpp"

#include <fmt/format.h>

#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "taskbench/fileio.hpp"
#include "taskbench/text.hpp"

namespace taskbench::sandbox {

namespace fs = std::filesystem;

namespace {

void append_block(std::string& out, std::string_view block) {
  if (block.empty()) return;
  out.append(block);
  if (out.back() != '\n') out.push_back('\n');
}

std::string comment_out(std::string_view block) {
  std::string out = "# install skipped: packages are expected to be present\n";
  for (auto line : text::split_lines(block)) {
    out += line.empty() ? "#" : fmt::format("# {}", line);
    out += '\n';
  }
  return out;
}

std::string safe_name(std::string_view id) {
  std::string out;
  for (char c : id) {
    bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? "task" : out;
}

std::vector<TestCaseVerdict> not_reached(int n) {
  std::vector<TestCaseVerdict> v;
  for (int i = 1; i <= n; ++i) v.push_back({i, VerdictStatus::NotReached, ""});
  return v;
}

}  // namespace

std::string assemble_program(const task::TaskSpec& task, std::string_view program,
                             bool allow_install) {
  const auto& s = task.sections;
  std::string out;
  if (!s.install_block.empty()) {
    append_block(out, allow_install ? std::string(s.install_block) : comment_out(s.install_block));
  }
  append_block(out, s.imports);
  out += '\n';
  append_block(out, program);
  out += '\n';
  append_block(out, s.tests);
  append_block(out, s.test_invocation);
  return out;
}

ExecutionReport build_report(std::string task_id, int attempt, int expected_cases,
                             std::span<const RunEvent> events, std::size_t max_output_bytes) {
  ExecutionReport r;
  r.task_id = std::move(task_id);
  r.attempt = attempt;
  std::size_t budget = max_output_bytes;
  for (const auto& ev : events) {
    if (ev.ev == EventKind::Line) {
      auto& dest = ev.stream.value_or(OutStream::Out) == OutStream::Out ? r.stdout_text
                                                                       : r.stderr_text;
      const auto& t = ev.text.value_or("");
      std::size_t need = t.size() + 1;
      if (need > budget) {
        r.truncated = true;
        budget = 0;
        continue;
      }
      budget -= need;
      dest.append(t).push_back('\n');
    } else if (ev.ev == EventKind::Exit) {
      r.exit_code = ev.code.value_or(0);
      r.duration_s = ev.duration_s.value_or(0.0);
      r.timed_out = ev.timeout;
      if (ev.error) r.error = *ev.error;
    }
  }
  if (r.timed_out && !r.error) r.error = "timeout";

  auto scan = scan_markers(r.stdout_text, expected_cases);
  r.verdicts = std::move(scan.verdicts);
  for (int i : scan.conflicts) {
    auto& v = r.verdicts[static_cast<std::size_t>(i - 1)];
    v.status = VerdictStatus::Failed;
    v.detail = "conflicting markers";
  }
  r.traceback = parse_traceback(r.stderr_text);
  if (!r.traceback) r.traceback = parse_traceback(r.stdout_text);
  if (!r.traceback) r.traceback = parse_failure_payload(r.stdout_text);
  return r;
}

bool detect_gpu() {
  std::error_code ec;
  if (fs::exists("/dev/nvidia0", ec) || fs::exists("/dev/dri/renderD128", ec)) return true;
  const char* cvd = std::getenv("CUDA_VISIBLE_DEVICES");
  return cvd != nullptr && *cvd != '\0' && std::string_view(cvd) != "-1";
}

Sandbox::Sandbox(std::shared_ptr<const Runner> runner, fs::path scratch_dir)
    : runner_(std::move(runner)), scratch_(std::move(scratch_dir)), gpu_(detect_gpu()) {
  if (!runner_) throw Error("sandbox needs a runner");
  if (scratch_.empty()) scratch_ = fs::temp_directory_path() / "taskbench-sandbox";
}

ExecutionReport Sandbox::execute(const task::TaskSpec& task, std::string_view program,
                                 const SandboxLimits& limits, int attempt) const {
  if (text::is_blank(program)) throw Error("empty program");
  auto n = counter_.fetch_add(1);
  auto dir = scratch_ / fmt::format("{}-{}-{}-{}", safe_name(task.id), attempt, ::getpid(), n);
  auto file = dir / "main.py";
  write_file(file, assemble_program(task, program, limits.allow_install));
  struct Cleanup {
    fs::path dir;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
  } cleanup{dir};
  return execute_file(task.id, file, task.num_test_cases, limits, attempt);
}

ExecutionReport Sandbox::execute_file(const std::string& task_id, const fs::path& file,
                                      int expected_cases, const SandboxLimits& limits,
                                      int attempt) const {
  limits.validate();
  RunRequest req{fs::absolute(file).string(), limits, {}};
  std::vector<RunEvent> events;
  runner_->run(req, [&](const RunEvent& ev) { events.push_back(ev); });
  auto report = build_report(task_id, attempt, expected_cases, events, limits.max_output_bytes);
  report.gpu_visible = gpu_;
  if (!timings_) report.duration_s = 0.0;
  return report;
}

std::vector<ExecutionReport> run_batch(const Sandbox& sandbox, std::span<const Job> jobs,
                                       const SandboxLimits& limits, int workers,
                                       const std::atomic<bool>* stop) {
  std::vector<ExecutionReport> out(jobs.size());
  std::vector<char> ran(jobs.size(), 0);  // not vector<bool>: written concurrently
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    while (true) {
      if (stop && stop->load()) return;
      auto i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const auto& job = jobs[i];
      try {
        out[i] = sandbox.execute(*job.task, job.program, limits, job.attempt);
      } catch (const Error& e) {
        out[i].task_id = job.task->id;
        out[i].attempt = job.attempt;
        out[i].verdicts = not_reached(job.task->num_test_cases);
        out[i].error = e.what();
      }
      ran[i] = 1;
    }
  };
  int n = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  std::vector<std::thread> threads;
  for (int t = 1; t < n; ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();

  std::vector<ExecutionReport> done;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (ran[i]) done.push_back(std::move(out[i]));
  }
  std::stable_sort(done.begin(), done.end(), [](const auto& a, const auto& b) {
    return std::tie(a.task_id, a.attempt) < std::tie(b.task_id, b.attempt);
  });
  return done;
}

}  // namespace taskbench::sandbox
