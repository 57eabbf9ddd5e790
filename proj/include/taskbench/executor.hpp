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

#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taskbench/runner.hpp"
#include "taskbench/sandbox.hpp"
#include "taskbench/task.hpp"

namespace taskbench::sandbox {

/// Builds the file that is actually run: the task's install and import
/// blocks, the candidate program, then the task's tests and invocation.
/// Without allow_install the install block is kept but commented out.
std::string assemble_program(const task::TaskSpec& task, std::string_view program,
                             bool allow_install);

/// Folds a runner's event stream into a report.
ExecutionReport build_report(std::string task_id, int attempt, int expected_cases,
                             std::span<const RunEvent> events, std::size_t max_output_bytes);

/// Probes for a visible GPU (device nodes or CUDA_VISIBLE_DEVICES).
bool detect_gpu();

class Sandbox {
 public:
  explicit Sandbox(std::shared_ptr<const Runner> runner, std::filesystem::path scratch_dir = {});

  /// Runs `program` against the task's tests. Throws SandboxError when the
  /// runner is unavailable; a timeout still yields a report.
  ExecutionReport execute(const task::TaskSpec& task, std::string_view program,
                          const SandboxLimits& limits, int attempt = 0) const;

  /// Runs an already assembled task file as-is.
  ExecutionReport execute_file(const std::string& task_id, const std::filesystem::path& file,
                               int expected_cases, const SandboxLimits& limits,
                               int attempt = 0) const;

  const Runner& runner() const { return *runner_; }
  /// When off, reports carry a zero duration so artifacts are reproducible.
  void set_record_timings(bool on) { timings_ = on; }


 private:
  std::shared_ptr<const Runner> runner_;
  std::filesystem::path scratch_;
  bool gpu_;
  bool timings_ = true;
  mutable std::atomic<unsigned> counter_{0};
};

struct Job {
  const task::TaskSpec* task = nullptr;
  std::string program;
  int attempt = 0;
};

/// Runs jobs on `workers` threads. Results are ordered by (task id, attempt)
/// regardless of completion order. Sandbox failures become reports with
/// `error` set and every case NotReached.
std::vector<ExecutionReport> run_batch(const Sandbox& sandbox, std::span<const Job> jobs,
                                       const SandboxLimits& limits, int workers,
                                       const std::atomic<bool>* stop = nullptr);

}  // namespace taskbench::sandbox
