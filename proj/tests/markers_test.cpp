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

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <set>

#include "taskbench/fileio.hpp"
#include "taskbench/sandbox.hpp"
#include "taskbench/wire.hpp"

namespace fs = std::filesystem;
using namespace taskbench;
using namespace taskbench::sandbox;

using VS = VerdictStatus;

namespace {

std::vector<VS> statuses(const std::vector<TestCaseVerdict>& v) {
  std::vector<VS> out;
  for (const auto& x : v) out.push_back(x.status);
  return out;
}

}  // namespace

TEST(ParseMarkers, FirstCaseOnly) {
  auto v = parse_markers("Test case [1/3] started.\nTest case [1/3] succeeded...\n", 3);
  EXPECT_EQ(statuses(v), (std::vector<VS>{VS::Passed, VS::NotReached, VS::NotReached}));
  EXPECT_EQ(v[0].index, 1);
  EXPECT_EQ(v[2].index, 3);
}

TEST(ParseMarkers, FailedDetailIsTheFailureLine) {
  auto v = parse_markers(
      "Test case [1/3] succeeded: ok\n"
      "Test case [2/3] failed: ...\n"
      "error: boom\n",
      3);
  ASSERT_EQ(v[1].status, VS::Failed);
  EXPECT_EQ(v[1].detail, "Test case [2/3] failed: ...");
}

TEST(ParseMarkers, ConflictThrows) {
  try {
    parse_markers("Test case [2/3] succeeded\nTest case [2/3] failed: x\n", 3);
    FAIL();
  } catch (const SandboxError& e) {
    EXPECT_EQ(e.kind(), SandboxErrorKind::ConflictingMarkers);
  }
  auto scan = scan_markers("Test case [2/3] succeeded\nTest case [2/3] failed: x\n", 3);
  EXPECT_EQ(scan.conflicts, std::vector<int>{2});
}

TEST(ParseMarkers, TerminalIsNotReopenedByStarted) {
  auto v = parse_markers("Test case [1/1] failed: a\nTest case [1/1] started.\n", 1);
  EXPECT_EQ(v[0].status, VS::Failed);
  // Repeating the same outcome is not a conflict.
  v = parse_markers("Test case [1/1] succeeded\nTest case [1/1] succeeded again\n", 1);
  EXPECT_EQ(v[0].status, VS::Passed);
}

TEST(ParseMarkers, AnchoredAndRangeChecked) {
  auto v = parse_markers(
      "log: Test case [1/2] succeeded\n"
      "  Test case [1/2] succeeded\n"
      "Test case [3/2] succeeded\n"
      "Test case [0/2] succeeded\n"
      "Testing case [2/2] succeeded, trailing text\n",
      2);
  EXPECT_EQ(statuses(v), (std::vector<VS>{VS::NotReached, VS::Passed}));
}

TEST(ParseMarkers, StartedOnlyIsNotReached) {
  auto v = parse_markers("Test case [1/2] started.\n", 2);
  EXPECT_EQ(v[0].status, VS::NotReached);
  EXPECT_TRUE(v[0].detail.empty());
}

TEST(ParseMarkers, RejectsZeroExpected) { EXPECT_THROW(parse_markers("", 0), Error); }

// Random interleavings checked against a set-based oracle: a case is Passed
// iff some succeeded line exists and no failed line does.
TEST(ParseMarkers, FuzzAgainstOracle) {
  std::mt19937 rng(2024);
  const std::vector<std::string> words = {"started.", "succeeded: ok", "failed: bad", "skipped"};
  const std::vector<std::string> noise = {"", "error: x", "Testing started.", "Test case [",
                                          "Test case [a/b] failed", "Traceback (most recent call last):",
                                          "Test case [2/3] skipped", "\t", "Test case [1/3"};
  for (int iter = 0; iter < 10000; ++iter) {
    int expected = 1 + static_cast<int>(rng() % 5);
    std::set<int> succ, fail;
    std::string out;
    int n = static_cast<int>(rng() % 14);
    for (int k = 0; k < n; ++k) {
      if (rng() % 4 == 0) {
        out += noise[rng() % noise.size()];
      } else {
        int idx = static_cast<int>(rng() % (expected + 2));
        const auto& w = words[rng() % words.size()];
        out += (rng() % 2 ? "Test case [" : "Testing case [") + std::to_string(idx) + "/" +
               std::to_string(expected) + "] " + w;
        if (idx >= 1 && idx <= expected) {
          if (w.starts_with("succeeded")) succ.insert(idx);
          if (w.starts_with("failed")) fail.insert(idx);
        }
      }
      out += rng() % 5 == 0 ? "\r\n" : "\n";
    }
    auto scan = scan_markers(out, expected);
    ASSERT_EQ(static_cast<int>(scan.verdicts.size()), expected) << out;
    std::vector<int> conflicts;
    for (int i = 1; i <= expected; ++i) {
      bool s = succ.count(i) > 0, f = fail.count(i) > 0;
      if (s && f) {
        conflicts.push_back(i);
        continue;
      }
      VS want = s ? VS::Passed : f ? VS::Failed : VS::NotReached;
      ASSERT_EQ(scan.verdicts[i - 1].status, want) << "case " << i << "\n" << out;
    }
    auto got = scan.conflicts;
    std::sort(got.begin(), got.end());
    ASSERT_EQ(got, conflicts) << out;
    if (conflicts.empty()) {
      ASSERT_EQ(parse_markers(out, expected), scan.verdicts);
    } else {
      ASSERT_THROW(parse_markers(out, expected), SandboxError);
    }
  }
}

TEST(ParseTraceback, AbsentWithoutHeader) {
  EXPECT_FALSE(parse_traceback("").has_value());
  EXPECT_FALSE(parse_traceback("warning: something\nValueError: not a traceback\n").has_value());
}

// Captured once from running traceback/fail3.py.
TEST(ParseTraceback, FrozenTwoFrameFixture) {
  auto text = read_file(fs::path(TASKBENCH_TEST_DATA) / "traceback" / "two_frames.txt");
  auto tb = parse_traceback("some output\n" + text);
  ASSERT_TRUE(tb);
  EXPECT_EQ(tb->exception_type, "ZeroDivisionError");
  EXPECT_EQ(tb->message, "division by zero");
  ASSERT_EQ(tb->frames.size(), 2u);
  EXPECT_EQ(tb->frames[0].file, "/tmp/tbfix/fail3.py");
  EXPECT_EQ(tb->frames[0].line, 3);
  EXPECT_EQ(tb->frames[0].symbol, "<module>");
  EXPECT_EQ(tb->frames[0].source_line, "divide(1, 0)");
  EXPECT_EQ(tb->frames[1].line, 2);
  EXPECT_EQ(tb->frames[1].symbol, "divide");
  EXPECT_EQ(tb->frames[1].source_line, "return a / b");
  EXPECT_EQ(tb->raw + "\n", text);
}

TEST(ParseTraceback, TruncatedBlockDegrades) {
  std::string text =
      "Traceback (most recent call last):\n"
      "  File \"x.py\", line 9, in <module>\n"
      "    main()\n";
  auto tb = parse_traceback(text);
  ASSERT_TRUE(tb);
  EXPECT_TRUE(tb->exception_type.empty());
  EXPECT_EQ(tb->frames.size(), 1u);
  EXPECT_NE(text.find(tb->raw), std::string::npos);
  EXPECT_FALSE(tb->raw.empty());
}

TEST(ParseTraceback, PicksLastCompleteBlock) {
  std::string text =
      "Traceback (most recent call last):\n"
      "  File \"a.py\", line 1, in <module>\n"
      "KeyError: 'k'\n"
      "\n"
      "During handling of the above exception, another exception occurred:\n"
      "\n"
      "Traceback (most recent call last):\n"
      "  File \"a.py\", line 3, in <module>\n"
      "    x = d['k']\n"
      "        ~^^^^^\n"
      "  File \"a.py\", line 5, in helper\n"
      "requests.exceptions.HTTPError: 404 Client Error: Not Found\n"
      "Traceback (most recent call last):\n"
      "  File \"a.py\", line 7, in <module>\n";
  auto tb = parse_traceback(text);
  ASSERT_TRUE(tb);
  EXPECT_EQ(tb->exception_type, "requests.exceptions.HTTPError");
  EXPECT_EQ(tb->message, "404 Client Error: Not Found");
  ASSERT_EQ(tb->frames.size(), 2u);
  EXPECT_EQ(tb->frames[0].source_line, "x = d['k']");
  EXPECT_TRUE(tb->frames[1].source_line.empty());
  EXPECT_NE(text.find(tb->raw), std::string::npos);
}

TEST(ParseTraceback, BareExceptionName) {
  auto tb = parse_traceback(
      "Traceback (most recent call last):\n  File \"s.py\", line 2, in <module>\nKeyboardInterrupt\n");
  ASSERT_TRUE(tb);
  EXPECT_EQ(tb->exception_type, "KeyboardInterrupt");
  EXPECT_EQ(tb->message, "");
}

TEST(FailurePayload, LastFailedCaseWithErrorLine) {
  std::string out =
      "Test case [1/3] failed: first\nerror: one\n"
      "Test case [2/3] succeeded\n"
      "Test case [3/3] failed: shape mismatch\nerror: expected 3 got 4\n";
  auto tb = parse_failure_payload(out);
  ASSERT_TRUE(tb);
  EXPECT_EQ(tb->raw, "Test case [3/3] failed: shape mismatch\nerror: expected 3 got 4");
  EXPECT_EQ(tb->message, "expected 3 got 4");
  EXPECT_TRUE(tb->frames.empty());
  EXPECT_FALSE(parse_failure_payload("Test case [1/1] succeeded\n"));
  auto bare = parse_failure_payload("Test case [1/1] failed: reason here\n");
  ASSERT_TRUE(bare);
  EXPECT_EQ(bare->message, "reason here");
}

TEST(Wire, EventNamesAreExact) {
  EXPECT_EQ(encode_event(RunEvent::start()), R"({"ev":"start"})");
  EXPECT_EQ(encode_event(RunEvent::line(OutStream::Err, "x")),
            R"({"ev":"line","stream":"err","text":"x"})");
  EXPECT_EQ(encode_event(RunEvent::exit(0, 0.5)), R"({"code":0,"duration_s":0.5,"ev":"exit"})");
  EXPECT_EQ(encode_event(RunEvent::exit(-1, 1.0, true)),
            R"({"code":-1,"duration_s":1.0,"ev":"exit","timeout":true})");
}

TEST(Wire, RoundTrip) {
  std::vector<RunEvent> evs = {RunEvent::start(), RunEvent::line(OutStream::Out, "héllo \"q\""),
                               RunEvent::line(OutStream::Err, ""), RunEvent::exit(3, 1.25, true)};
  for (const auto& ev : evs) EXPECT_EQ(decode_event(encode_event(ev)), ev);
  RunRequest req{"/tmp/t.py", {}, {{"HF_HOME", "/cache"}}};
  req.limits.allow_network = false;
  req.limits.wall_clock_timeout_s = 12.5;
  EXPECT_EQ(decode_request(encode_request(req)), req);
}

TEST(Wire, MalformedEventsRejected) {
  for (const char* bad : {"", "[]", "{}", R"({"ev":"begin"})", R"({"ev":"line","stream":"tty","text":""})",
                          R"({"ev":"line","stream":"out"})", R"({"ev":"exit"})"}) {
    try {
      decode_event(bad);
      ADD_FAILURE() << bad;
    } catch (const SandboxError& e) {
      EXPECT_EQ(e.kind(), SandboxErrorKind::ProtocolViolation) << bad;
    }
  }
  EXPECT_THROW(decode_request(R"({"limits":{}})"), SandboxError);
}

TEST(Wire, Grammar) {
  EventGrammar g;
  g.accept(RunEvent::start());
  g.accept(RunEvent::line(OutStream::Out, "a"));
  EXPECT_THROW(g.finish(), SandboxError);
  EXPECT_THROW(g.accept(RunEvent::start()), SandboxError);
  g.accept(RunEvent::exit(0, 0));
  g.finish();
  EXPECT_THROW(g.accept(RunEvent::line(OutStream::Out, "late")), SandboxError);

  EventGrammar first_line;
  EXPECT_THROW(first_line.accept(RunEvent::line(OutStream::Out, "a")), SandboxError);
  EventGrammar lone_exit;  // request parse failure
  lone_exit.accept(RunEvent::exit(kRequestErrorCode, 0));
  lone_exit.finish();
}

TEST(Limits, Validate) {
  SandboxLimits l;
  EXPECT_EQ(l.wall_clock_timeout_s, 300.0);
  EXPECT_EQ(l.max_output_bytes, 10u << 20);
  EXPECT_TRUE(l.allow_network);
  EXPECT_FALSE(l.allow_install);
  l.validate();
  l.wall_clock_timeout_s = 0;
  EXPECT_THROW(l.validate(), SandboxError);
  l.wall_clock_timeout_s = 1;
  l.max_output_bytes = 0;
  EXPECT_THROW(l.validate(), SandboxError);
}
