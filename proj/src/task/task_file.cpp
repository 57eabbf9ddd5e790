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

#include <algorithm>
#include <set>

#include "taskbench/marker_syntax.hpp"
#include "taskbench/pyscan.hpp"
#include "taskbench/task.hpp"
#include "taskbench/text.hpp"

namespace taskbench::task {

std::string_view section_name(Section s) {
  switch (s) {
    case Section::Install: return "install";
    case Section::Imports: return "imports";
    case Section::Signature: return "signature";
    case Section::Docstring: return "docstring";
    case Section::Implementation: return "implementation";
    case Section::Tests: return "tests";
    case Section::TestInvocation: return "test_invocation";
  }
  return "";
}

std::string delimiter_line(Section s) { return fmt::format("# %% {}\n", section_name(s)); }

const std::string& TaskSections::text(Section s) const {
  switch (s) {
    case Section::Install: return install_block;
    case Section::Imports: return imports;
    case Section::Signature: return signature;
    case Section::Docstring: return docstring;
    case Section::Implementation: return implementation;
    case Section::Tests: return tests;
    case Section::TestInvocation: return test_invocation;
  }
  return install_block;
}

std::string& TaskSections::text(Section s) {
  return const_cast<std::string&>(std::as_const(*this).text(s));
}

std::string TaskSections::reconstruct() const {
  std::string out = preamble;
  for (std::size_t i = 0; i < kSectionOrder.size(); ++i) {
    out += delimiters[i];
    out += text(kSectionOrder[i]);
  }
  return out;
}

namespace {

using pyscan::Line;

std::optional<Section> delimiter_section(std::string_view content) {
  auto s = text::trim_right(content);
  if (!s.starts_with("#")) return std::nullopt;
  s = text::trim_left(s.substr(1));
  if (!s.starts_with("%%")) return std::nullopt;
  s = text::trim_left(s.substr(2));
  for (auto sec : kSectionOrder) {
    if (s == section_name(sec)) return sec;
  }
  return std::nullopt;
}

std::size_t index_of(Section s) {
  return static_cast<std::size_t>(std::find(kSectionOrder.begin(), kSectionOrder.end(), s) -
                                  kSectionOrder.begin());
}

TaskSections split_delimited(std::string_view text) {
  TaskSections out;
  struct Mark {
    Section section;
    std::size_t line_begin;
    std::size_t body_begin;
  };
  std::vector<Mark> marks;
  std::size_t offset = 0;
  for (auto raw : text::split_lines_keep(text)) {
    auto content = raw;
    while (!content.empty() && (content.back() == '\n' || content.back() == '\r')) {
      content.remove_suffix(1);
    }
    if (auto sec = delimiter_section(content)) {
      marks.push_back({*sec, offset, offset + raw.size()});
    }
    offset += raw.size();
  }

  std::size_t last = 0;
  bool first = true;
  for (const auto& m : marks) {
    auto idx = index_of(m.section);
    if (!first && idx <= last) {
      throw ParseError(ParseErrorKind::MalformedDelimiters, std::string(section_name(m.section)));
    }
    first = false;
    last = idx;
  }

  std::array<bool, 7> present{};
  out.preamble = std::string(text.substr(0, marks.front().line_begin));
  for (std::size_t i = 0; i < marks.size(); ++i) {
    const auto& m = marks[i];
    auto end = i + 1 < marks.size() ? marks[i + 1].line_begin : text.size();
    auto idx = index_of(m.section);
    present[idx] = true;
    out.delimiters[idx] = std::string(text.substr(m.line_begin, m.body_begin - m.line_begin));
    out.text(m.section) = std::string(text.substr(m.body_begin, end - m.body_begin));
  }
  for (std::size_t i = 1; i < kSectionOrder.size(); ++i) {
    if (!present[i]) {
      throw ParseError(ParseErrorKind::MissingSection, std::string(section_name(kSectionOrder[i])));
    }
  }
  return out;
}

bool is_installer_line(std::string_view content) {
  return content.find("pip") != std::string_view::npos &&
         content.find("install") != std::string_view::npos;
}

std::string slice(const std::vector<Line>& lines, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end && i < lines.size(); ++i) out.append(lines[i].raw);
  return out;
}

// Index one past the last line of the header that starts at `def_line`.
std::size_t header_end(const std::vector<Line>& lines, std::size_t def_line) {
  std::size_t end = def_line + 1;
  while (end < lines.size() && lines[end].continuation) ++end;
  return end;
}

// Index one past the docstring that starts at the first non-blank line at or
// after `from`; returns `from` when there is no docstring.
std::size_t docstring_end(const std::vector<Line>& lines, std::size_t from) {
  std::size_t d = from;
  while (d < lines.size() && text::is_blank(lines[d].content)) ++d;
  if (d >= lines.size() || lines[d].continuation) return from;
  if (!pyscan::starts_with_string(text::trim_left(lines[d].content))) return from;
  std::size_t end = d + 1;
  while (end < lines.size() && lines[end].in_string) ++end;
  return end;
}

// Start of the decorator/comment run directly above `line`.
std::size_t attach_leading(const std::vector<Line>& lines, std::size_t line, std::size_t floor) {
  while (line > floor) {
    const auto& prev = lines[line - 1];
    bool decorator = pyscan::is_top_level(prev) && prev.content.starts_with("@");
    bool comment = !prev.continuation && prev.content.starts_with("#");
    if (!decorator && !comment) break;
    --line;
  }
  return line;
}

bool is_function_start(const Line& l) { return !pyscan::def_name(l).empty(); }

TaskSections split_heuristic(std::string_view src) {
  TaskSections out;
  out.heuristic = true;
  auto lines = pyscan::scan(src);
  const std::size_t n = lines.size();

  std::size_t def_line = n;
  for (std::size_t i = 0; i < n; ++i) {
    auto name = pyscan::def_name(lines[i]);
    if (!name.empty() && !name.starts_with("test_")) {
      def_line = i;
      break;
    }
  }
  if (def_line == n) throw ParseError(ParseErrorKind::MissingSection, "signature");

  std::size_t sig_begin = def_line;
  while (sig_begin > 0 && pyscan::is_top_level(lines[sig_begin - 1]) &&
         lines[sig_begin - 1].content.starts_with("@")) {
    --sig_begin;
  }
  std::size_t sig_end = header_end(lines, def_line);
  std::size_t doc_end = docstring_end(lines, sig_end);
  if (doc_end == sig_end) throw ParseError(ParseErrorKind::MissingSection, "docstring");

  std::size_t tests_begin = n;
  for (std::size_t i = doc_end; i < n; ++i) {
    if (pyscan::def_name(lines[i]).starts_with("test_")) {
      tests_begin = attach_leading(lines, i, doc_end);
      break;
    }
  }
  bool has_impl = false;
  for (std::size_t i = doc_end; i < std::min(tests_begin, n); ++i) {
    if (!text::is_blank(lines[i].content)) has_impl = true;
  }
  if (!has_impl) throw ParseError(ParseErrorKind::MissingSection, "implementation");
  if (tests_begin == n) throw ParseError(ParseErrorKind::MissingSection, "tests");

  std::size_t invoke_begin = n;
  for (std::size_t i = tests_begin; i < n; ++i) {
    const auto& l = lines[i];
    if (!pyscan::is_top_level(l)) continue;
    auto c = l.content;
    if (c.starts_with("#") || c.starts_with("@") || c.starts_with("class ") ||
        is_function_start(l)) {
      continue;
    }
    invoke_begin = attach_leading(lines, i, tests_begin + 1);
    break;
  }
  if (invoke_begin == n) throw ParseError(ParseErrorKind::MissingSection, "test_invocation");

  // Install block: everything up to the end of the last installer statement.
  std::size_t install_end = 0;
  for (std::size_t i = 0; i < sig_begin; ++i) {
    if (is_installer_line(lines[i].content) && !pyscan::is_comment(lines[i])) {
      install_end = i + 1;
      while (install_end < sig_begin &&
             (lines[install_end].continuation ||
              (!text::is_blank(lines[install_end].content) &&
               text::indent_of(lines[install_end].content) > 0))) {
        ++install_end;
      }
    }
  }
  bool has_imports = false;
  for (std::size_t i = install_end; i < sig_begin; ++i) {
    if (!text::is_blank(lines[i].content)) has_imports = true;
  }
  if (!has_imports) throw ParseError(ParseErrorKind::MissingSection, "imports");

  out.install_block = slice(lines, 0, install_end);
  out.imports = slice(lines, install_end, sig_begin);
  out.signature = slice(lines, sig_begin, sig_end);
  out.docstring = slice(lines, sig_end, doc_end);
  out.implementation = slice(lines, doc_end, tests_begin);
  out.tests = slice(lines, tests_begin, invoke_begin);
  out.test_invocation = slice(lines, invoke_begin, n);
  return out;
}

// Quoted string literals in `s`, in order.
std::vector<std::string> string_literals(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char q = s[i];
    if (q != '"' && q != '\'') {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    std::string lit;
    while (j < s.size() && s[j] != q) {
      if (s[j] == '\\' && j + 1 < s.size()) ++j;
      lit.push_back(s[j]);
      ++j;
    }
    out.push_back(std::move(lit));
    i = j + 1;
  }
  return out;
}

bool plausible_package(std::string_view p) {
  if (p.empty() || p.starts_with("-")) return false;
  if (p == "pip" || p == "install" || p == "python" || p == "python3" || p == "-m") return false;
  return std::all_of(p.begin(), p.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' ||
           c == '[' || c == ']' || c == '=' || c == '<' || c == '>' || c == ',' || c == '~' ||
           c == '!';
  });
}

}  // namespace

std::vector<std::string> parse_install_packages(std::string_view block) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto add = [&](std::string_view p) {
    p = text::trim(p);
    if (!plausible_package(p)) return;
    if (seen.insert(std::string(p)).second) out.emplace_back(p);
  };

  auto lines = pyscan::scan(block);
  bool in_list = false;
  for (const auto& l : lines) {
    auto c = l.content;
    auto trimmed = text::trim(c);
    if (trimmed.starts_with("#")) continue;
    bool list_start = false;
    if (auto eq = c.find('='); eq != std::string_view::npos) {
      auto rhs = text::trim_left(c.substr(eq + 1));
      list_start = rhs.starts_with("[");
    }
    if (list_start || in_list) {
      for (const auto& lit : string_literals(c)) add(lit);
      in_list = c.find(']') == std::string_view::npos;
      continue;
    }
    if (!is_installer_line(c)) continue;
    for (const auto& lit : string_literals(c)) {
      // Shell form: "pip install a b" inside a single string.
      if (auto at = lit.find("install "); at != std::string::npos && lit.find("pip") < at) {
        std::string_view rest(lit);
        rest.remove_prefix(at + 8);
        std::size_t pos = 0;
        while (pos < rest.size()) {
          auto sp = rest.find(' ', pos);
          add(rest.substr(pos, sp == std::string_view::npos ? std::string_view::npos : sp - pos));
          if (sp == std::string_view::npos) break;
          pos = sp + 1;
        }
      } else {
        add(lit);
      }
    }
    // Notebook/shell form without quotes.
    if (auto at = trimmed.find("pip install "); at != std::string_view::npos &&
                                               string_literals(c).empty()) {
      auto rest = trimmed.substr(at + 12);
      std::size_t pos = 0;
      while (pos < rest.size()) {
        auto sp = rest.find(' ', pos);
        add(rest.substr(pos, sp == std::string_view::npos ? std::string_view::npos : sp - pos));
        if (sp == std::string_view::npos) break;
        pos = sp + 1;
      }
    }
  }
  return out;
}

TaskSections split_sections(std::string_view text) {
  bool delimited = false;
  for (auto line : text::split_lines(text)) {
    if (delimiter_section(line)) {
      delimited = true;
      break;
    }
  }
  TaskSections out = delimited ? split_delimited(text) : split_heuristic(text);
  out.install = parse_install_packages(out.install_block);
  return out;
}

std::string render_task_file(const TaskSections& sections) {
  std::string out;
  for (auto s : kSectionOrder) {
    out += delimiter_line(s);
    const auto& body = sections.text(s);
    out += body;
    if (!body.empty() && body.back() != '\n') out += '\n';
  }
  return out;
}

FunctionParts split_function(std::string_view program) {
  FunctionParts out;
  auto lines = pyscan::scan(program);
  const std::size_t n = lines.size();
  std::size_t def_line = n;
  for (std::size_t i = 0; i < n; ++i) {
    auto name = pyscan::def_name(lines[i]);
    if (!name.empty() && !name.starts_with("test_")) {
      def_line = i;
      break;
    }
  }
  if (def_line == n) {
    out.leading = std::string(program);
    return out;
  }
  std::size_t sig_begin = def_line;
  while (sig_begin > 0 && pyscan::is_top_level(lines[sig_begin - 1]) &&
         lines[sig_begin - 1].content.starts_with("@")) {
    --sig_begin;
  }
  std::size_t sig_end = header_end(lines, def_line);
  std::size_t doc_end = docstring_end(lines, sig_end);
  std::size_t body_end = n;
  for (std::size_t i = doc_end; i < n; ++i) {
    if (pyscan::is_top_level(lines[i]) && !lines[i].content.starts_with("#")) {
      body_end = attach_leading(lines, i, doc_end);
      break;
    }
  }
  out.leading = slice(lines, 0, sig_begin);
  out.signature = slice(lines, sig_begin, sig_end);
  out.docstring = slice(lines, sig_end, doc_end);
  out.body = slice(lines, doc_end, body_end);
  out.trailing = slice(lines, body_end, n);
  return out;
}

std::string docstring_summary(std::string_view docstring) {
  for (auto line : text::split_lines(docstring)) {
    auto t = text::trim(line);
    std::size_t i = 0;
    while (i < t.size() && i < 2 && std::string_view("rRuUbBfF").find(t[i]) != std::string_view::npos) {
      ++i;
    }
    if (t.substr(i).starts_with("\"\"\"") || t.substr(i).starts_with("'''")) {
      t = t.substr(i + 3);
    } else if (t.substr(i).starts_with("\"") || t.substr(i).starts_with("'")) {
      t = t.substr(i + 1);
    }
    for (std::string_view q : {"\"\"\"", "'''"}) {
      if (t.ends_with(q)) t.remove_suffix(3);
    }
    t = text::trim(t);
    if (!t.empty()) return std::string(t);
  }
  return {};
}

int count_declared_test_cases(std::string_view tests) {
  int total = 0;
  std::set<int> started;
  std::size_t from = 0;
  while (auto m = find_marker(tests, from)) {
    total = std::max(total, m->total);
    if (marker_word(m->rest) == MarkerWord::Started && !started.insert(m->index).second) {
      throw ParseError(ParseErrorKind::DuplicateTestIndex, std::to_string(m->index));
    }
    from = m->begin + 4;
  }
  return total;
}

TaskSpec parse_task_file(std::string_view text, const TaskMetadata& meta) {
  TaskSpec spec;
  spec.sections = split_sections(text);
  spec.category = parse_category(meta.category);
  spec.id = meta.id;
  spec.source = meta.source;
  spec.instruction = meta.instruction ? *meta.instruction : docstring_summary(spec.sections.docstring);
  spec.num_test_cases = count_declared_test_cases(spec.sections.tests);
  return spec;
}

}  // namespace taskbench::task
