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

#include "taskbench/pyscan.hpp"

#include <cctype>
#include <string>

#include "taskbench/text.hpp"

namespace taskbench::pyscan {

namespace {

bool is_prefix_char(char c) {
  switch (c) {
    case 'r': case 'R': case 'b': case 'B': case 'u': case 'U': case 'f': case 'F':
      return true;
    default:
      return false;
  }
}

}  // namespace

std::vector<Line> scan(std::string_view text) {
  std::vector<Line> out;
  char triple = 0;  // quote char of the open triple-quoted string
  int depth = 0;
  bool backslash = false;
  std::size_t offset = 0;
  for (auto raw : text::split_lines_keep(text)) {
    Line line;
    line.raw = raw;
    line.offset = offset;
    offset += raw.size();
    auto content = raw;
    if (!content.empty() && content.back() == '\n') content.remove_suffix(1);
    if (!content.empty() && content.back() == '\r') content.remove_suffix(1);
    line.content = content;
    line.in_string = triple != 0;
    line.continuation = triple != 0 || depth > 0 || backslash;
    backslash = false;

    std::size_t i = 0;
    const std::size_t n = content.size();
    while (i < n) {
      char c = content[i];
      if (triple) {
        if (c == '\\') {
          i += 2;
          continue;
        }
        if (c == triple && content.substr(i, 3) == std::string(3, triple)) {
          triple = 0;
          i += 3;
          continue;
        }
        ++i;
        continue;
      }
      if (c == '#') break;
      if (c == '"' || c == '\'') {
        if (content.substr(i, 3) == std::string(3, c)) {
          triple = c;
          i += 3;
          continue;
        }
        ++i;
        while (i < n && content[i] != c) {
          if (content[i] == '\\') ++i;
          ++i;
        }
        ++i;
        continue;
      }
      if (c == '(' || c == '[' || c == '{') ++depth;
      if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
      if (c == '\\' && i + 1 == n) backslash = true;
      ++i;
    }
    out.push_back(line);
  }
  return out;
}

bool is_top_level(const Line& line) {
  return !line.continuation && !line.content.empty() && line.content[0] != ' ' &&
         line.content[0] != '\t' && !text::is_blank(line.content);
}

bool is_comment(const Line& line) {
  if (line.continuation) return false;
  auto t = text::trim_left(line.content);
  return !t.empty() && t[0] == '#';
}

std::string_view def_name(const Line& line) {
  if (!is_top_level(line)) return {};
  auto s = line.content;
  if (s.starts_with("async ")) s = text::trim_left(s.substr(6));
  if (!s.starts_with("def ")) return {};
  s = text::trim_left(s.substr(4));
  std::size_t i = 0;
  while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' ||
                          static_cast<unsigned char>(s[i]) >= 0x80)) {
    ++i;
  }
  return s.substr(0, i);
}

bool starts_with_string(std::string_view t) {
  std::size_t i = 0;
  while (i < t.size() && i < 2 && is_prefix_char(t[i])) ++i;
  return i < t.size() && (t[i] == '"' || t[i] == '\'');
}

}  // namespace taskbench::pyscan
