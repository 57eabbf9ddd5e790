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

#include <optional>
#include <string_view>

namespace taskbench::task {

/// `Test case [i/N] <rest>`; "Testing case" is accepted as a spelling variant.
struct MarkerMatch {
  int index = 0;
  int total = 0;
  std::string_view rest;    // text after the closing bracket, left-trimmed
  std::size_t begin = 0;    // offset of "Test" in the searched text
};

/// Matches a marker starting exactly at `text[0]`.
std::optional<MarkerMatch> match_marker_at(std::string_view text);

/// Finds the first marker anywhere in `text` at or after `from`.
std::optional<MarkerMatch> find_marker(std::string_view text, std::size_t from = 0);

enum class MarkerWord { None, Started, Succeeded, Failed };

/// Classifies the first word of a marker's trailing text.
MarkerWord marker_word(std::string_view rest);

}  // namespace taskbench::task
