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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "taskbench/error.hpp"

namespace taskbench::sandbox {

struct SandboxLimits {
  double wall_clock_timeout_s = 300.0;
  std::size_t max_output_bytes = 10u << 20;
  bool allow_network = true;
  bool allow_install = false;

  /// Throws SandboxError(InvalidLimits) unless timeout > 0 and the cap > 0.
  void validate() const;

  bool operator==(const SandboxLimits&) const = default;
};

enum class VerdictStatus { Passed, Failed, NotReached };

std::string_view status_name(VerdictStatus s);
VerdictStatus parse_status(std::string_view name);

struct TestCaseVerdict {
  int index = 0;  // 1-based
  VerdictStatus status = VerdictStatus::NotReached;
  std::string detail;

  bool operator==(const TestCaseVerdict&) const = default;
};

struct Frame {
  std::string file;
  int line = 0;
  std::string symbol;
  std::string source_line;

  bool operator==(const Frame&) const = default;
};

struct TracebackInfo {
  std::string exception_type;
  std::string message;
  std::vector<Frame> frames;  // outermost first
  std::string raw;

  bool operator==(const TracebackInfo&) const = default;
};

struct ExecutionReport {
  std::string task_id;
  int attempt = 0;
  std::vector<TestCaseVerdict> verdicts;
  std::string stdout_text;
  std::string stderr_text;
  std::optional<TracebackInfo> traceback;
  int exit_code = 0;
  double duration_s = 0.0;
  bool truncated = false;
  bool timed_out = false;
  /// Whether a GPU was visible to the run. Recorded, never required.
  bool gpu_visible = false;
  /// Set when the run could not produce trustworthy output.
  std::optional<std::string> error;

  /// True when there is at least one verdict and every verdict passed.
  bool all_passed() const;
  bool any_passed() const;
  std::size_t passed_count() const;

  bool operator==(const ExecutionReport&) const = default;
};

enum class SandboxErrorKind {
  SandboxUnavailable,
  Timeout,
  ConflictingMarkers,
  InvalidLimits,
  ProtocolViolation,
};

class SandboxError : public Error {
 public:
  SandboxError(SandboxErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  SandboxErrorKind kind() const { return kind_; }

 private:
  SandboxErrorKind kind_;
};

/// Marker verdicts with conflicts collected instead of thrown.
struct MarkerScan {
  std::vector<TestCaseVerdict> verdicts;
  std::vector<int> conflicts;  // indices with both terminal outcomes
};

MarkerScan scan_markers(std::string_view stdout_text, int expected_cases);

/// One verdict per expected case. Throws ConflictingMarkers when a case has
/// both a succeeded and a failed line.
std::vector<TestCaseVerdict> parse_markers(std::string_view stdout_text, int expected_cases);

/// The last complete interpreter traceback in `text`. When only an
/// unterminated block exists it is returned with an empty exception type.
std::optional<TracebackInfo> parse_traceback(std::string_view text);

/// The last `failed` marker line together with its `error:` continuation,
/// as printed by the benchmark's per-case exception handler.
std::optional<TracebackInfo> parse_failure_payload(std::string_view stdout_text);

}  // namespace taskbench::sandbox
