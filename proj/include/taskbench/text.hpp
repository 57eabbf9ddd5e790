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

#include <string>
#include <string_view>
#include <vector>

namespace taskbench::text {

/// Splits into lines, dropping the terminators. A trailing newline does not
/// produce an empty final element.
std::vector<std::string_view> split_lines(std::string_view s);

/// Splits keeping each line's terminator, so that concatenating the pieces
/// gives back `s` exactly.
std::vector<std::string_view> split_lines_keep(std::string_view s);

std::string_view trim(std::string_view s);
std::string_view trim_left(std::string_view s);
std::string_view trim_right(std::string_view s);
bool is_blank(std::string_view s);

/// Collapses every run of whitespace to a single space and trims the ends.
std::string collapse_whitespace(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Replaces every occurrence of `from` with `to`.
std::string replace_all(std::string_view s, std::string_view from, std::string_view to);

/// Leading whitespace width, tabs counted as one column.
std::size_t indent_of(std::string_view line);

}  // namespace taskbench::text
