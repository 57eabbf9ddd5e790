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

#include <fmt/format.h>

#include "taskbench/marker_syntax.hpp"
#include "taskbench/sandbox.hpp"
#include "taskbench/text.hpp"

namespace taskbench::sandbox {

void SandboxLimits::validate() const {
  if (!(wall_clock_timeout_s > 0.0)) {
    throw SandboxError(SandboxErrorKind::InvalidLimits, "timeout must be positive");
  }
  if (max_output_bytes == 0) {
    throw SandboxError(SandboxErrorKind::InvalidLimits, "max_output_bytes must be positive");
  }
}

std::string_view status_name(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Passed: return "passed";
    case VerdictStatus::Failed: return "failed";
    case VerdictStatus::NotReached: return "not_reached";
  }
  return "not_reached";
}

VerdictStatus parse_status(std::string_view name) {
  if (name == "passed") return VerdictStatus::Passed;
  if (name == "failed") return VerdictStatus::Failed;
  if (name == "not_reached") return VerdictStatus::NotReached;
  throw Error(fmt::format("unknown verdict status: {}", name));
}

bool ExecutionReport::all_passed() const {
  return !verdicts.empty() && passed_count() == verdicts.size();
}

bool ExecutionReport::any_passed() const { return passed_count() > 0; }

std::size_t ExecutionReport::passed_count() const {
  std::size_t n = 0;
  for (const auto& v : verdicts) n += v.status == VerdictStatus::Passed;
  return n;
}

MarkerScan scan_markers(std::string_view stdout_text, int expected_cases) {
  MarkerScan scan;
  if (expected_cases < 1) return scan;
  scan.verdicts.resize(static_cast<std::size_t>(expected_cases));
  for (int i = 0; i < expected_cases; ++i) scan.verdicts[i].index = i + 1;
  std::vector<bool> conflicted(scan.verdicts.size(), false);

  for (const auto& line : text::split_lines(stdout_text)) {
    auto m = task::match_marker_at(line);
    if (!m || m->index < 1 || m->index > expected_cases) continue;
    auto& v = scan.verdicts[static_cast<std::size_t>(m->index - 1)];
    auto word = task::marker_word(m->rest);
    if (word == task::MarkerWord::Started) {
      if (v.status == VerdictStatus::NotReached) v.detail = line;
      continue;
    }
    if (word != task::MarkerWord::Succeeded && word != task::MarkerWord::Failed) continue;
    auto outcome = word == task::MarkerWord::Succeeded ? VerdictStatus::Passed : VerdictStatus::Failed;
    if (v.status == VerdictStatus::NotReached) {
      v.status = outcome;
      v.detail = line;
    } else if (v.status != outcome && !conflicted[m->index - 1]) {
      conflicted[m->index - 1] = true;
      scan.conflicts.push_back(m->index);
    }
  }
  // A case that started but never finished keeps NotReached with no detail.
  for (auto& v : scan.verdicts) {
    if (v.status == VerdictStatus::NotReached) v.detail.clear();
  }
  return scan;
}

std::vector<TestCaseVerdict> parse_markers(std::string_view stdout_text, int expected_cases) {
  if (expected_cases < 1) throw Error("expected_cases must be at least 1");
  auto scan = scan_markers(stdout_text, expected_cases);
  if (!scan.conflicts.empty()) {
    throw SandboxError(SandboxErrorKind::ConflictingMarkers,
                       fmt::format("conflicting markers for case {}", scan.conflicts.front()));
  }
  return std::move(scan.verdicts);
}

}  // namespace taskbench::sandbox
