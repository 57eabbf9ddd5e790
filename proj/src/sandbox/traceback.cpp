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

#include <cctype>
#include <charconv>

#include "taskbench/marker_syntax.hpp"
#include "taskbench/sandbox.hpp"
#include "taskbench/text.hpp"

namespace taskbench::sandbox {

namespace {

constexpr std::string_view kHeader = "Traceback (most recent call last):";

struct LineRef {
  std::size_t offset;
  std::string_view content;  // terminator stripped
};

std::vector<LineRef> index_lines(std::string_view text) {
  std::vector<LineRef> out;
  std::size_t offset = 0;
  for (auto piece : text::split_lines_keep(text)) {
    auto content = piece;
    while (!content.empty() && (content.back() == '\n' || content.back() == '\r')) {
      content.remove_suffix(1);
    }
    out.push_back({offset, content});
    offset += piece.size();
  }
  return out;
}

std::optional<Frame> parse_frame(std::string_view line) {
  constexpr std::string_view kFile = "  File \"";
  if (!line.starts_with(kFile)) return std::nullopt;
  auto rest = line.substr(kFile.size());
  auto sep = rest.find("\", line ");
  if (sep == std::string_view::npos) return std::nullopt;
  Frame f;
  f.file = std::string(rest.substr(0, sep));
  rest = rest.substr(sep + 8);
  auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), f.line);
  if (ec != std::errc()) return std::nullopt;
  rest = rest.substr(static_cast<std::size_t>(ptr - rest.data()));
  if (rest.starts_with(", in ")) f.symbol = std::string(rest.substr(5));
  return f;
}

bool is_marker_row(std::string_view line) {
  auto t = text::trim(line);
  if (t.empty()) return false;
  for (char c : t) {
    if (c != '^' && c != '~' && c != ' ') return false;
  }
  return true;
}

// `Type: message` or a bare `Type`, where Type is a dotted identifier.
bool parse_exception_line(std::string_view line, TracebackInfo& info) {
  auto colon = line.find(':');
  auto type = colon == std::string_view::npos ? line : line.substr(0, colon);
  if (type.empty() || std::isdigit(static_cast<unsigned char>(type[0]))) return false;
  for (char c : type) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') return false;
  }
  info.exception_type = std::string(type);
  info.message = colon == std::string_view::npos ? std::string()
                                                 : std::string(text::trim(line.substr(colon + 1)));
  return true;
}

struct Block {
  TracebackInfo info;
  bool complete = false;
};

Block parse_block(std::string_view text, const std::vector<LineRef>& lines, std::size_t header) {
  Block block;
  std::size_t last = header;
  for (std::size_t i = header + 1; i < lines.size(); ++i) {
    auto c = lines[i].content;
    if (auto frame = parse_frame(c)) {
      block.info.frames.push_back(std::move(*frame));
      last = i;
      continue;
    }
    if (c.starts_with(" ") || c.starts_with("\t")) {
      // Source excerpt or caret row belonging to the previous frame.
      if (!block.info.frames.empty() && block.info.frames.back().source_line.empty() &&
          !is_marker_row(c)) {
        block.info.frames.back().source_line = std::string(text::trim(c));
      }
      last = i;
      continue;
    }
    if (parse_exception_line(c, block.info)) {
      block.complete = true;
      last = i;
    }
    break;
  }
  auto begin = lines[header].offset;
  auto end = lines[last].offset + lines[last].content.size();
  block.info.raw = std::string(text.substr(begin, end - begin));
  return block;
}

}  // namespace

std::optional<TracebackInfo> parse_traceback(std::string_view text) {
  auto lines = index_lines(text);
  std::optional<TracebackInfo> fallback;
  for (std::size_t i = lines.size(); i-- > 0;) {
    if (text::trim_right(lines[i].content) != kHeader) continue;
    auto block = parse_block(text, lines, i);
    if (block.complete) return std::move(block.info);
    if (!fallback) {
      block.info.exception_type.clear();
      block.info.message.clear();
      fallback = std::move(block.info);
    }
  }
  return fallback;
}

std::optional<TracebackInfo> parse_failure_payload(std::string_view stdout_text) {
  auto lines = index_lines(stdout_text);
  for (std::size_t i = lines.size(); i-- > 0;) {
    auto m = task::match_marker_at(lines[i].content);
    if (!m || task::marker_word(m->rest) != task::MarkerWord::Failed) continue;
    TracebackInfo info;
    std::size_t last = i;
    if (i + 1 < lines.size() && lines[i + 1].content.starts_with("error:")) {
      last = i + 1;
      info.message = std::string(text::trim(lines[last].content.substr(6)));
    } else {
      auto rest = m->rest.substr(6);  // after "failed"
      if (rest.starts_with(":")) rest.remove_prefix(1);
      info.message = std::string(text::trim(rest));
    }
    auto begin = lines[i].offset;
    auto end = lines[last].offset + lines[last].content.size();
    info.raw = std::string(stdout_text.substr(begin, end - begin));
    return info;
  }
  return std::nullopt;
}

}  // namespace taskbench::sandbox
