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

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "taskbench/error.hpp"

namespace taskbench::task {

enum class Category {
  NLP,
  ComputerVision,
  TabularData,
  AudioSpeech,
  Classification,
  Multimodal,
  ReinforcementLearning,
};

inline constexpr std::array<Category, 7> kCategories = {
    Category::NLP,          Category::ComputerVision, Category::TabularData,
    Category::AudioSpeech,  Category::Classification, Category::Multimodal,
    Category::ReinforcementLearning,
};

/// Display label, e.g. "Natural Language Processing". This is also the
/// on-disk spelling.
std::string_view category_label(Category c);

/// Accepts exactly the seven display labels (case-sensitive).
Category parse_category(std::string_view label);

enum class ParseErrorKind {
  MissingSection,
  UnknownCategory,
  DuplicateTestIndex,
  MalformedDelimiters,
};

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, std::string subject);

  ParseErrorKind kind() const { return kind_; }
  /// Section name, category label, delimiter name, or test index as text.
  const std::string& subject() const { return subject_; }

 private:
  ParseErrorKind kind_;
  std::string subject_;
};

enum class Section {
  Install,
  Imports,
  Signature,
  Docstring,
  Implementation,
  Tests,
  TestInvocation,
};

inline constexpr std::array<Section, 7> kSectionOrder = {
    Section::Install,        Section::Imports, Section::Signature,      Section::Docstring,
    Section::Implementation, Section::Tests,   Section::TestInvocation,
};

std::string_view section_name(Section s);

/// The delimiter comment that opens `s` in a curated file, newline included.
std::string delimiter_line(Section s);

struct TaskSections {
  /// Package names requested by the install block.
  std::vector<std::string> install;

  std::string install_block;
  std::string imports;
  std::string signature;
  std::string docstring;
  std::string implementation;
  std::string tests;
  std::string test_invocation;

  /// Text ahead of the first delimiter. Always empty for legacy files.
  std::string preamble;
  /// Delimiter line that opened each section (empty when absent or legacy).
  std::array<std::string, 7> delimiters;
  /// True when the file had no delimiters and the heuristic splitter ran.
  bool heuristic = false;

  const std::string& text(Section s) const;
  std::string& text(Section s);

  /// Byte-exact reconstruction of the parsed file.
  std::string reconstruct() const;
};

struct SourceMeta {
  std::string domain;
  std::string model_name;
  std::string model_description;
  std::string example_code;
  std::map<std::string, std::string> performance_metrics;

  bool operator==(const SourceMeta&) const = default;
};

/// Sidecar metadata that accompanies a task file on disk.
struct TaskMetadata {
  std::string id;
  std::string category;
  std::optional<std::string> instruction;
  SourceMeta source;
};

struct TaskSpec {
  std::string id;
  Category category = Category::NLP;
  std::string instruction;
  TaskSections sections;
  SourceMeta source;
  int num_test_cases = 0;
};

/// Segments a task file. Curated files use `# %% <section>` delimiter lines;
/// files without any delimiter go through the heuristic splitter.
TaskSections split_sections(std::string_view text);

TaskSpec parse_task_file(std::string_view text, const TaskMetadata& meta);

/// Emits `sections` in the curated delimited layout (canonical delimiters,
/// no preamble).
std::string render_task_file(const TaskSections& sections);

struct FunctionParts {
  std::string leading;    // anything ahead of the function (imports, comments)
  std::string signature;  // decorators + def line(s)
  std::string docstring;  // empty when the function has none
  std::string body;       // up to the end of the function block
  std::string trailing;   // module-level code after the function
};

/// Splits a candidate program around its first non-test function.
/// When no function is found, everything lands in `leading`.
FunctionParts split_function(std::string_view program);

/// First non-blank line of a docstring with the quotes removed.
std::string docstring_summary(std::string_view docstring);

/// Highest N among `Test case [i/N]` markers in a tests block. Throws
/// DuplicateTestIndex when a case index is started twice.
int count_declared_test_cases(std::string_view tests);

std::vector<std::string> parse_install_packages(std::string_view install_block);

struct CodeStats {
  std::size_t code_lines = 0;
  std::size_t code_tokens = 0;

  bool operator==(const CodeStats&) const = default;
};

/// Lines that are neither blank nor comment-only, and the lexical tokens on
/// them. A token spanning several counted lines counts once per line.
CodeStats count_code_stats(std::string_view code);

/// Stats over the body of the first function in `program` (signature and
/// docstring excluded). Falls back to the whole text when there is no
/// function.
CodeStats program_stats(std::string_view program);

enum class ViolationKind { WrongTestCount, EmptyInstruction, EmptySignature };

struct Violation {
  ViolationKind kind;
  int expected = 0;
  int got = 0;

  bool operator==(const Violation&) const = default;
};

inline constexpr int kRequiredTestCases = 3;

std::vector<Violation> validate_task(const TaskSpec& task);

std::string describe(const Violation& v);

}  // namespace taskbench::task
