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

#include <array>
#include <cctype>

#include "taskbench/llm.hpp"
#include "taskbench/pyscan.hpp"
#include "taskbench/text.hpp"

namespace taskbench::llm {

namespace {

enum class Kind { Blank, Code, Prose };

constexpr std::array<std::string_view, 30> kKeywords = {
    "def",    "class", "import", "from",  "return", "if",     "elif",   "else",
    "for",    "while", "try",    "except", "finally", "with",  "raise",  "assert",
    "yield",  "pass",  "break",  "continue", "lambda", "global", "nonlocal", "async",
    "await",  "del",   "print",  "not",   "True",   "False"};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool is_fence(std::string_view trimmed) { return trimmed.starts_with("```"); }

Kind classify(const pyscan::Line& line) {
  auto c = line.content;
  if (text::is_blank(c)) return Kind::Blank;
  if (line.in_string) return Kind::Code;
  auto t = text::trim(c);
  if (is_fence(t)) return Kind::Prose;
  if (c.front() == ' ' || c.front() == '\t') return Kind::Code;
  char first = t.front();
  if (std::string_view("#@)]}'\"").find(first) != std::string_view::npos) return Kind::Code;
  if (std::isdigit(static_cast<unsigned char>(first))) return Kind::Code;
  if (pyscan::starts_with_string(t)) return Kind::Code;
  if (!is_ident_start(first)) return Kind::Prose;

  std::size_t n = 0;
  while (n < t.size() && (is_ident(t[n]) || t[n] == '.')) ++n;
  auto word = t.substr(0, n);
  auto rest = t.substr(n);
  for (auto kw : kKeywords) {
    if (word == kw && (rest.empty() || rest.front() == ' ' || rest.front() == ':' || rest.front() == '(')) {
      return Kind::Code;
    }
  }
  // name(...), name[...], name, other  directly attached
  if (!rest.empty() && (rest.front() == '(' || rest.front() == '[' || rest.front() == ',')) return Kind::Code;
  // name = ..., name += ..., name == ..., name < ...
  auto after = text::trim_left(rest);
  if (!after.empty() && std::string_view("=<>").find(after.front()) != std::string_view::npos) {
    return Kind::Code;
  }
  if (after.size() > 1 && after[1] == '=' &&
      std::string_view("+-*/%&|^!").find(after.front()) != std::string_view::npos) {
    return Kind::Code;
  }
  // Annotated assignment: name: type = value
  if (!rest.empty() && rest.front() == ':' && rest.find('=') != std::string_view::npos) return Kind::Code;
  return Kind::Prose;
}

std::string join_lines(const std::vector<pyscan::Line>& lines, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    out.append(lines[i].content);
    out.push_back('\n');
  }
  return out;
}

// Longest run of code and blank lines (by code-line count), blank edges
// trimmed. Returns nullopt when there is no prose at all or no code at all.
std::optional<std::string> code_region(std::string_view s) {
  auto lines = pyscan::scan(s);
  std::vector<Kind> kinds;
  bool any_prose = false;
  for (const auto& l : lines) {
    kinds.push_back(classify(l));
    any_prose = any_prose || kinds.back() == Kind::Prose;
  }
  if (!any_prose) return std::nullopt;
  std::size_t best_begin = 0, best_end = 0, best_count = 0;
  for (std::size_t i = 0; i < kinds.size();) {
    if (kinds[i] == Kind::Prose) {
      ++i;
      continue;
    }
    std::size_t j = i, count = 0;
    while (j < kinds.size() && kinds[j] != Kind::Prose) count += kinds[j++] == Kind::Code;
    if (count > best_count) {
      best_begin = i;
      best_end = j;
      best_count = count;
    }
    i = j;
  }
  if (best_count == 0) return std::nullopt;
  while (kinds[best_begin] == Kind::Blank) ++best_begin;
  while (kinds[best_end - 1] == Kind::Blank) --best_end;
  return join_lines(lines, best_begin, best_end);
}

// Narrows to a region that classifies as all code when scanned on its own;
// each step strictly shrinks the text, so this terminates.
std::string settle(std::string s) {
  while (auto r = code_region(s)) {
    if (*r == s) break;
    s = std::move(*r);
  }
  return s;
}

std::optional<std::string> first_fenced_block(std::string_view s) {
  auto lines = text::split_lines(s);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!is_fence(text::trim(lines[i]))) continue;
    std::string body;
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      if (is_fence(text::trim(lines[j]))) return body;
      body.append(lines[j]);
      body.push_back('\n');
    }
    return body;  // unterminated fence, e.g. a completion cut at max_tokens
  }
  return std::nullopt;
}

}  // namespace

std::string extract_code(std::string_view completion) {
  if (auto block = first_fenced_block(completion)) {
    return code_region(*block) ? settle(*block) : *block;
  }
  if (code_region(completion)) return settle(std::string(completion));
  return std::string(completion);
}

}  // namespace taskbench::llm
