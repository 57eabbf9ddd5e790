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

#include "taskbench/marker_syntax.hpp"

#include <cctype>

#include "taskbench/text.hpp"

namespace taskbench::task {

namespace {

// Parses a run of digits; returns false when there is none or it overflows a
// reasonable case count.
bool read_int(std::string_view s, std::size_t& pos, int& value) {
  std::size_t start = pos;
  long long v = 0;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    v = v * 10 + (s[pos] - '0');
    if (v > 1'000'000) return false;
    ++pos;
  }
  value = static_cast<int>(v);
  return pos > start;
}

}  // namespace

std::optional<MarkerMatch> match_marker_at(std::string_view s) {
  std::size_t pos = 0;
  if (s.starts_with("Testing case [")) {
    pos = 14;
  } else if (s.starts_with("Test case [")) {
    pos = 11;
  } else {
    return std::nullopt;
  }
  MarkerMatch m;
  if (!read_int(s, pos, m.index)) return std::nullopt;
  if (pos >= s.size() || s[pos] != '/') return std::nullopt;
  ++pos;
  if (!read_int(s, pos, m.total)) return std::nullopt;
  if (pos >= s.size() || s[pos] != ']') return std::nullopt;
  ++pos;
  m.rest = text::trim_left(s.substr(pos));
  return m;
}

std::optional<MarkerMatch> find_marker(std::string_view s, std::size_t from) {
  while (from < s.size()) {
    auto hit = s.find("Test", from);
    if (hit == std::string_view::npos) return std::nullopt;
    if (auto m = match_marker_at(s.substr(hit))) {
      m->begin = hit;
      return m;
    }
    from = hit + 4;
  }
  return std::nullopt;
}

MarkerWord marker_word(std::string_view rest) {
  std::size_t n = 0;
  while (n < rest.size() && std::isalpha(static_cast<unsigned char>(rest[n]))) ++n;
  auto word = rest.substr(0, n);
  if (word == "started") return MarkerWord::Started;
  if (word == "succeeded") return MarkerWord::Succeeded;
  if (word == "failed") return MarkerWord::Failed;
  return MarkerWord::None;
}

}  // namespace taskbench::task
