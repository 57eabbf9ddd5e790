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
#include <string_view>
#include <vector>

#include "taskbench/task.hpp"
#include "taskbench/text.hpp"

namespace taskbench::task {

namespace {

// Generic lexer: identifiers, numbers, strings, operators and punctuation.
// Comments and whitespace produce no tokens. Each token records the first and
// last line it occupies.
struct Token {
  std::size_t first_line;
  std::size_t last_line;
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

constexpr std::array<std::string_view, 4> kOps3 = {"**=", "//=", ">>=", "<<="};
constexpr std::array<std::string_view, 21> kOps2 = {
    "->", "==", "!=", "<=", ">=", "**", "//", "+=", "-=", "*=", "/=",
    "%=", "&=", "|=", "^=", ":=", "<<", ">>", "@=", "..", "~="};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos_ < src_.size()) {
      unsigned char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
        continue;
      }
      if (std::isspace(c)) {
        ++pos_;
        continue;
      }
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      std::size_t first = line_;
      if (string_ahead()) {
        lex_string();
      } else if (ident_start(c)) {
        while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
      } else if (std::isdigit(c) || (c == '.' && pos_ + 1 < src_.size() &&
                                     std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        lex_number();
      } else if (src_.substr(pos_, 3) == "...") {
        pos_ += 3;
      } else {
        lex_operator();
      }
      out.push_back({first, line_});
    }
    return out;
  }

 private:
  bool string_ahead() const {
    std::size_t i = pos_;
    while (i < src_.size() && i - pos_ < 2 &&
           std::string_view("rRbBuUfF").find(src_[i]) != std::string_view::npos) {
      ++i;
    }
    return i < src_.size() && (src_[i] == '"' || src_[i] == '\'');
  }

  void lex_string() {
    while (src_[pos_] != '"' && src_[pos_] != '\'') ++pos_;
    char q = src_[pos_];
    bool triple = src_.substr(pos_, 3) == std::string_view(q == '"' ? "\"\"\"" : "'''");
    pos_ += triple ? 3 : 1;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\\' && pos_ + 1 < src_.size()) {
        if (src_[pos_ + 1] == '\n') ++line_;
        pos_ += 2;
        continue;
      }
      if (c == '\n') {
        if (!triple) return;  // unterminated single-line string ends here
        ++line_;
        ++pos_;
        continue;
      }
      if (c == q) {
        if (!triple) {
          ++pos_;
          return;
        }
        if (src_.substr(pos_, 3) == std::string_view(q == '"' ? "\"\"\"" : "'''")) {
          pos_ += 3;
          return;
        }
      }
      ++pos_;
    }
  }

  void lex_number() {
    while (pos_ < src_.size()) {
      unsigned char c = src_[pos_];
      if (std::isalnum(c) || c == '_' || c == '.') {
        ++pos_;
        continue;
      }
      if ((c == '+' || c == '-') && (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E') &&
          pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
        ++pos_;
        continue;
      }
      break;
    }
  }

  void lex_operator() {
    for (auto op : kOps3) {
      if (src_.substr(pos_, 3) == op) {
        pos_ += 3;
        return;
      }
    }
    for (auto op : kOps2) {
      if (src_.substr(pos_, 2) == op) {
        pos_ += 2;
        return;
      }
    }
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

}  // namespace

CodeStats count_code_stats(std::string_view code) {
  auto lines = text::split_lines(code);
  if (lines.empty()) return {};
  std::vector<std::size_t> touches(lines.size() + 1, 0);
  for (const auto& tok : Lexer(code).run()) {
    for (auto l = tok.first_line; l <= tok.last_line && l < lines.size(); ++l) {
      if (!text::is_blank(lines[l])) ++touches[l];
    }
  }
  CodeStats stats;
  for (auto t : touches) {
    if (t == 0) continue;
    ++stats.code_lines;
    stats.code_tokens += t;
  }
  return stats;
}

CodeStats program_stats(std::string_view program) {
  auto parts = split_function(program);
  if (parts.signature.empty()) return count_code_stats(program);
  return count_code_stats(parts.body);
}

}  // namespace taskbench::task
