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

#include "taskbench/task.hpp"
#include "taskbench/text.hpp"

namespace taskbench::task {

std::string_view category_label(Category c) {
  switch (c) {
    case Category::NLP: return "Natural Language Processing";
    case Category::ComputerVision: return "Computer Vision";
    case Category::TabularData: return "Tabular Data";
    case Category::AudioSpeech: return "Audio and Speech";
    case Category::Classification: return "Classification";
    case Category::Multimodal: return "Multimodal";
    case Category::ReinforcementLearning: return "Reinforcement Learning";
  }
  return "";
}

Category parse_category(std::string_view label) {
  for (auto c : kCategories) {
    if (category_label(c) == label) return c;
  }
  throw ParseError(ParseErrorKind::UnknownCategory, std::string(label));
}

namespace {
std::string_view kind_text(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::MissingSection: return "missing section";
    case ParseErrorKind::UnknownCategory: return "unknown category";
    case ParseErrorKind::DuplicateTestIndex: return "duplicate test index";
    case ParseErrorKind::MalformedDelimiters: return "malformed section delimiters";
  }
  return "parse error";
}
}  // namespace

ParseError::ParseError(ParseErrorKind kind, std::string subject)
    : Error(fmt::format("{}: {}", kind_text(kind), subject)),
      kind_(kind),
      subject_(std::move(subject)) {}

std::vector<Violation> validate_task(const TaskSpec& task) {
  std::vector<Violation> out;
  if (task.num_test_cases != kRequiredTestCases) {
    out.push_back({ViolationKind::WrongTestCount, kRequiredTestCases, task.num_test_cases});
  }
  if (text::is_blank(task.instruction)) out.push_back({ViolationKind::EmptyInstruction});
  if (text::is_blank(task.sections.signature)) out.push_back({ViolationKind::EmptySignature});
  return out;
}

std::string describe(const Violation& v) {
  switch (v.kind) {
    case ViolationKind::WrongTestCount:
      return fmt::format("expected {} test cases, found {}", v.expected, v.got);
    case ViolationKind::EmptyInstruction: return "instruction is empty";
    case ViolationKind::EmptySignature: return "function signature is empty";
  }
  return "";
}

}  // namespace taskbench::task
