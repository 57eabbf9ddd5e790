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

#include <string_view>
#include <vector>

namespace taskbench::pyscan {

/// One physical line plus the lexical state it starts in.
struct Line {
  std::string_view raw;      // with terminator
  std::string_view content;  // without terminator
  std::size_t offset = 0;    // byte offset of `raw` in the scanned text
  /// Starts inside a triple-quoted string, an open bracket, or after a
  /// backslash continuation.
  bool continuation = false;
  /// Starts inside a triple-quoted string.
  bool in_string = false;
};

/// Approximate Python line scanner: tracks triple-quoted strings, bracket
/// depth and backslash continuations well enough to find statement starts.
std::vector<Line> scan(std::string_view text);

/// True for a statement line at column 0 (not blank, not a continuation).
bool is_top_level(const Line& line);

bool is_comment(const Line& line);

/// `def name` / `async def name` at column 0; returns the name or empty.
std::string_view def_name(const Line& line);

/// True when the line opens with a string literal (optional r/u/b/f prefix).
bool starts_with_string(std::string_view trimmed);

}  // namespace taskbench::pyscan
