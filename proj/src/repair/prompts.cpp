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
#include "taskbench/repair.hpp"
#include "taskbench/text.hpp"

namespace taskbench::repair {

namespace {

std::string ensure_newline(std::string_view s) {
  std::string out(s);
  if (out.empty() || out.back() != '\n') out.push_back('\n');
  return out;
}

// Failed-case marker lines and the error lines printed right after them.
std::string failed_marker_lines(std::string_view stdout_text) {
  auto lines = text::split_lines(stdout_text);
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto m = task::match_marker_at(lines[i]);
    if (!m || task::marker_word(m->rest) != task::MarkerWord::Failed) continue;
    out.append(lines[i]).push_back('\n');
    if (i + 1 < lines.size() && lines[i + 1].starts_with("error:")) {
      out.append(lines[i + 1]).push_back('\n');
    }
  }
  return out;
}

std::string tail_lines(std::string_view s, std::size_t n) {
  auto lines = text::split_lines(s);
  std::size_t start = lines.size() > n ? lines.size() - n : 0;
  std::string out;
  for (std::size_t i = start; i < lines.size(); ++i) out.append(lines[i]).push_back('\n');
  return out;
}

}  // namespace

std::string generation_prompt(const task::TaskSpec& task) {
  const auto& s = task.sections;
  return fmt::format(
      "Complete the Python function below so that it meets the requirement.\n"
      "\n"
      "Requirement: {}\n"
      "\n"
      "Available imports:\n"
      "```python\n{}```\n"
      "\n"
      "Function to implement:\n"
      "```python\n{}{}```\n"
      "\n"
      "Reply with the complete function, including its signature and docstring, "
      "in a single ```python code block.\n",
      text::trim(task.instruction), ensure_newline(text::trim(s.imports)), s.signature,
      ensure_newline(s.docstring));
}

std::string traceback_excerpt(const sandbox::ExecutionReport& report) {
  const auto& tb = report.traceback;
  if (tb && !tb->frames.empty()) {
    std::string out = "Traceback (most recent call last):\n";
    std::size_t n = tb->frames.size();
    std::size_t first = n > kExcerptFrames ? n - kExcerptFrames : 0;
    if (first > 0) out += fmt::format("  ... {} outer frame(s) omitted\n", first);
    for (std::size_t i = first; i < n; ++i) {
      const auto& f = tb->frames[i];
      out += fmt::format("  File \"{}\", line {}, in {}\n", f.file, f.line, f.symbol);
      if (!f.source_line.empty()) out += fmt::format("    {}\n", f.source_line);
    }
    if (!tb->exception_type.empty()) {
      out += tb->message.empty() ? tb->exception_type : fmt::format("{}: {}", tb->exception_type, tb->message);
      out += '\n';
    }
    return out;
  }
  if (auto marks = failed_marker_lines(report.stdout_text); !marks.empty()) return marks;
  if (tb && !tb->raw.empty()) return ensure_newline(tb->raw);
  if (report.timed_out) return "Execution timed out before the tests finished.\n";
  if (report.error) return ensure_newline(*report.error);
  if (auto tail = tail_lines(report.stderr_text, 20); !tail.empty()) return tail;
  return fmt::format("No test case passed (exit code {}).\n", report.exit_code);
}

std::string analysis_prompt(const task::TaskSpec& task, const sandbox::ExecutionReport& report,
                            std::string_view program) {
  return fmt::format(
      "The Python code below was written for this requirement but failed its tests.\n"
      "\n"
      "Requirement: {}\n"
      "\n"
      "Code:\n"
      "```python\n{}```\n"
      "\n"
      "Error traceback:\n"
      "```\n{}```\n"
      "\n"
      "Identify where and why the code fails and suggest a concrete fix. Do not rewrite the "
      "whole program.\n",
      text::trim(task.instruction), ensure_newline(program), traceback_excerpt(report));
}

std::string render_repair_prompt(const RepairPrompt& p) {
  std::string suggestions = p.prior_analysis ? ensure_newline(text::trim(*p.prior_analysis)) : "(none)\n";
  return fmt::format(
      "Requirement: {}\n"
      "\n"
      "This code failed its tests:\n"
      "```python\n{}```\n"
      "\n"
      "Error traceback:\n"
      "```\n{}```\n"
      "\n"
      "Suggested fix:\n{}"
      "\n"
      "Write a new version of the complete function that fixes the error. Reply with the code "
      "in a single ```python code block.\n",
      text::trim(p.instruction), ensure_newline(p.failing_program), ensure_newline(p.traceback_excerpt),
      suggestions);
}

std::string_view echo_addendum() {
  return "\nYour previous answer repeated the failing code unchanged. Produce a different "
         "implementation.\n";
}

}  // namespace taskbench::repair
