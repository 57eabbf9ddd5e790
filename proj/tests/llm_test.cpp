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
#include <httplib.h>
#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <thread>

#include "taskbench/fileio.hpp"
#include "taskbench/hash.hpp"
#include "taskbench/llm.hpp"

namespace fs = std::filesystem;
using namespace taskbench;
using namespace taskbench::llm;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("taskbench-llm-" + std::to_string(::getpid())) / name;
  fs::create_directories(p.parent_path());
  fs::remove(p);
  return p;
}

CompletionRequest request(std::string prompt, std::string tag = "generate") {
  CompletionRequest r;
  r.prompt = std::move(prompt);
  r.tag = std::move(tag);
  return r;
}

// Provider that fails with `kind` a fixed number of times before answering.
class Flaky : public Provider {
 public:
  Flaky(LlmErrorKind kind, int failures) : kind_(kind), failures_(failures) {}
  CompletionResult complete(const CompletionRequest& req) override {
    ++calls;
    if (calls <= failures_) throw LlmError(kind_, "flaky");
    return {"ok:" + req.prompt, "flaky", 1.0, std::nullopt};
  }
  std::string name() const override { return "flaky"; }
  std::atomic<int> calls{0};

 private:
  LlmErrorKind kind_;
  int failures_;
};

struct RecordingSleeper {
  std::vector<std::chrono::milliseconds> waits;
  Sleeper fn() {
    return [this](std::chrono::milliseconds d) { waits.push_back(d); };
  }
};

// Local chat-completions server whose next answer is set per test.
class FakeServer {
 public:
  FakeServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      bodies.push_back(json::parse(req.body));
      tags.push_back(req.get_header_value("X-Taskbench-Tag"));
      auth.push_back(req.get_header_value("Authorization"));
      res.status = status;
      res.set_content(reply, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  int status = 200;
  std::string reply;
  std::vector<json> bodies;
  std::vector<std::string> tags;
  std::vector<std::string> auth;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
};

std::string chat_reply(const std::string& content) {
  return json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}},
              {"usage", {{"prompt_tokens", 11}, {"completion_tokens", 7}}}}
      .dump();
}

}  // namespace

TEST(Params, DefaultsAndValidation) {
  GenerationParams p;
  EXPECT_EQ(p.top_p, 0.9);
  EXPECT_EQ(p.temperature, 0.6);
  EXPECT_EQ(p.max_tokens, 2048);
  p.validate();
  for (auto bad : {GenerationParams{0.0, 0.6, 10, {}}, GenerationParams{1.1, 0.6, 10, {}},
                   GenerationParams{0.9, -1, 10, {}}, GenerationParams{0.9, 0.6, 0, {}}}) {
    EXPECT_THROW(bad.validate(), LlmError);
  }
}

TEST(Mock, ScriptedByPromptHash) {
  auto prompt = std::string("Write f.");
  MockProvider mock({{"", "", sha256_hex(prompt), "def f(): return 1", std::nullopt}});
  EXPECT_EQ(mock.complete(request(prompt)).text, "def f(): return 1");
  EXPECT_THROW(mock.complete(request("other")), LlmError);
}

TEST(Mock, RulesArePureAndOrdered) {
  MockProvider mock({{"repair", "BUG", "", "fixed", std::nullopt},
                     {"", "BUG", "", "still buggy", std::nullopt},
                     {"analyze", "", "", "", LlmErrorKind::RateLimited}});
  EXPECT_EQ(mock.complete(request("has BUG", "repair")).text, "fixed");
  EXPECT_EQ(mock.complete(request("has BUG", "generate")).text, "still buggy");
  EXPECT_EQ(mock.complete(request("has BUG", "generate")).text, "still buggy");
  try {
    mock.complete(request("x", "analyze"));
    FAIL();
  } catch (const LlmError& e) {
    EXPECT_EQ(e.kind(), LlmErrorKind::RateLimited);
  }
}

TEST(Mock, FromFile) {
  auto path = scratch("rules.jsonl");
  write_file(path,
             R"({"tag":"generate","contains":"sum","response":"def s(a, b):\n    return a + b\n"})"
             "\n"
             R"({"error":"unavailable"})"
             "\n");
  auto mock = MockProvider::from_file(path);
  EXPECT_EQ(mock->complete(request("sum two numbers")).text, "def s(a, b):\n    return a + b\n");
  EXPECT_THROW(mock->complete(request("other")), LlmError);
  write_file(path, "{\"tag\":\"x\"}\n");
  EXPECT_THROW(MockProvider::from_file(path), ConfigError);
}

TEST(Gateway, RetriesTransientFailuresWithBackoff) {
  auto flaky = std::make_shared<Flaky>(LlmErrorKind::ProviderUnavailable, 2);
  Gateway gw(flaky);
  RecordingSleeper sleeper;
  gw.set_sleeper(sleeper.fn());
  EXPECT_EQ(gw.complete(request("p")).text, "ok:p");
  EXPECT_EQ(flaky->calls, 3);
  using std::chrono::seconds;
  EXPECT_EQ(sleeper.waits, (std::vector<std::chrono::milliseconds>{seconds(1), seconds(4)}));
}

TEST(Gateway, ExhaustionSurfacesLastKind) {
  auto flaky = std::make_shared<Flaky>(LlmErrorKind::RateLimited, 100);
  Gateway gw(flaky);
  RecordingSleeper sleeper;
  gw.set_sleeper(sleeper.fn());
  try {
    gw.complete(request("p"));
    FAIL();
  } catch (const ProviderExhausted& e) {
    EXPECT_EQ(e.kind(), LlmErrorKind::RateLimited);
    EXPECT_EQ(e.calls(), 4);
  }
  EXPECT_EQ(flaky->calls, 4);
  using std::chrono::seconds;
  EXPECT_EQ(sleeper.waits, (std::vector<std::chrono::milliseconds>{seconds(1), seconds(4), seconds(9)}));
  auto log = gw.request_log();
  ASSERT_EQ(log.size(), 1u);
  EXPECT_FALSE(log[0].ok);
  EXPECT_EQ(log[0].calls, 4);
}

TEST(Gateway, MalformedIsNotRetried) {
  auto flaky = std::make_shared<Flaky>(LlmErrorKind::ResponseMalformed, 100);
  Gateway gw(flaky);
  gw.set_sleeper([](auto) { FAIL() << "no sleep expected"; });
  try {
    gw.complete(request("p"));
    FAIL();
  } catch (const ProviderExhausted&) {
    FAIL();
  } catch (const LlmError& e) {
    EXPECT_EQ(e.kind(), LlmErrorKind::ResponseMalformed);
  }
  EXPECT_EQ(flaky->calls, 1);
}

TEST(Gateway, RejectsInvalidRequests) {
  Gateway gw(std::make_shared<Flaky>(LlmErrorKind::RateLimited, 0));
  EXPECT_THROW(gw.complete(request("")), LlmError);
  auto r = request("p");
  r.params.top_p = 0;
  EXPECT_THROW(gw.complete(r), LlmError);
  EXPECT_THROW(Gateway(nullptr), ConfigError);
}

TEST(Gateway, LogPartitionsByTag) {
  MockProvider::Rule any{"", "", "", "x", std::nullopt};
  Gateway gw(std::make_shared<MockProvider>(std::vector<MockProvider::Rule>{any}));
  for (const char* tag : {"generate", "repair", "generate", "curate.tests", "analyze"}) gw.complete(request("p", tag));
  auto by_tag = gw.requests_by_tag();
  EXPECT_EQ(by_tag, (std::map<std::string, std::size_t>{
                        {"analyze", 1}, {"curate.tests", 1}, {"generate", 2}, {"repair", 1}}));
  std::size_t total = 0;
  for (const auto& [t, n] : by_tag) total += n;
  EXPECT_EQ(total, gw.request_log().size());
}

TEST(Gateway, BoundsInFlightRequests) {
  class Slow : public Provider {
   public:
    CompletionResult complete(const CompletionRequest&) override {
      int now = ++active;
      int seen = peak.load();
      while (now > seen && !peak.compare_exchange_weak(seen, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      --active;
      return {"x", "slow", 0, std::nullopt};
    }
    std::string name() const override { return "slow"; }
    std::atomic<int> active{0}, peak{0};
  };
  auto slow = std::make_shared<Slow>();
  GatewayOptions opts;
  opts.max_in_flight = 2;
  Gateway gw(slow, opts);
  std::vector<std::thread> ts;
  for (int i = 0; i < 8; ++i) ts.emplace_back([&] { gw.complete(request("p")); });
  for (auto& t : ts) t.join();
  EXPECT_LE(slow->peak.load(), 2);
  EXPECT_EQ(gw.request_log().size(), 8u);
}

TEST(Gateway, MinIntervalPacesCalls) {
  MockProvider::Rule any{"", "", "", "x", std::nullopt};
  GatewayOptions opts;
  opts.min_interval = std::chrono::milliseconds(1000);
  Gateway gw(std::make_shared<MockProvider>(std::vector<MockProvider::Rule>{any}), opts);
  RecordingSleeper sleeper;
  gw.set_sleeper(sleeper.fn());
  gw.complete(request("a"));
  gw.complete(request("b"));
  ASSERT_EQ(sleeper.waits.size(), 1u);
  EXPECT_GT(sleeper.waits[0].count(), 900);
}

TEST(Journal, ReplayReproducesResponses) {
  auto path = scratch("journal.jsonl");
  MockProvider::Rule a{"", "alpha", "", "A", std::nullopt};
  MockProvider::Rule b{"", "beta", "", "", LlmErrorKind::ResponseMalformed};
  auto journal = std::make_shared<Journal>(path);
  Gateway live(std::make_shared<MockProvider>(std::vector<MockProvider::Rule>{a, b}), {}, journal);
  EXPECT_EQ(live.complete(request("alpha")).text, "A");
  EXPECT_THROW(live.complete(request("beta")), LlmError);

  Gateway replay(std::make_shared<ReplayProvider>(path));
  EXPECT_EQ(replay.complete(request("alpha")).text, "A");
  EXPECT_EQ(replay.complete(request("alpha")).text, "A");
  try {
    replay.complete(request("beta"));
    FAIL();
  } catch (const LlmError& e) {
    EXPECT_EQ(e.kind(), LlmErrorKind::ResponseMalformed);
  }
  try {
    replay.complete(request("gamma"));
    FAIL();
  } catch (const LlmError& e) {
    EXPECT_EQ(e.kind(), LlmErrorKind::ReplayMiss);
  }
  // Params are part of the key.
  auto r = request("alpha");
  r.params.temperature = 0.0;
  EXPECT_THROW(replay.complete(r), LlmError);
}

TEST(Journal, RepeatedRequestsReplayInOrder) {
  auto path = scratch("ordered.jsonl");
  Journal j(path);
  auto req = request("same");
  j.record(req, {"first", "mock", 5, std::nullopt});
  j.record(req, {"second", "mock", 5, Usage{1, 2}});
  ReplayProvider rp(path);
  EXPECT_EQ(rp.complete(req).text, "first");
  EXPECT_EQ(rp.complete(req).text, "second");
  EXPECT_EQ(rp.complete(req).text, "second");
  EXPECT_EQ(read_file(path).find("latency"), std::string::npos);
}

TEST(OpenAi, DefaultParamsOnTheWire) {
  FakeServer server;
  server.reply = chat_reply("def f():\n    return 1\n");
  OpenAiCompatibleProvider p({server.base_url(), "test-model", "sk-test", 5});
  auto req = request("Write f.", "repair");
  req.system = "You write Python.";
  auto res = p.complete(req);
  EXPECT_EQ(res.text, "def f():\n    return 1\n");
  EXPECT_EQ(res.usage, (Usage{11, 7}));
  ASSERT_EQ(server.bodies.size(), 1u);
  const auto& body = server.bodies[0];
  EXPECT_EQ(body["top_p"].get<double>(), 0.9);
  EXPECT_EQ(body["temperature"].get<double>(), 0.6);
  EXPECT_EQ(body["max_tokens"].get<int>(), 2048);
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["content"], "Write f.");
  EXPECT_FALSE(body.contains("stop"));
  EXPECT_EQ(server.tags[0], "repair");
  EXPECT_EQ(server.auth[0], "Bearer sk-test");
}

TEST(OpenAi, ErrorMapping) {
  FakeServer server;
  OpenAiCompatibleProvider p({server.base_url(), "m", "", 5});
  auto kind_of = [&](int status, std::string body) {
    server.status = status;
    server.reply = std::move(body);
    try {
      p.complete(request("x"));
    } catch (const LlmError& e) {
      return e.kind();
    }
    ADD_FAILURE() << status;
    return LlmErrorKind::ReplayMiss;
  };
  EXPECT_EQ(kind_of(200, R"({"choices":[{"message":{"content":"trunc)"), LlmErrorKind::ResponseMalformed);
  EXPECT_EQ(kind_of(200, R"({"choices":[]})"), LlmErrorKind::ResponseMalformed);
  EXPECT_EQ(kind_of(429, "{}"), LlmErrorKind::RateLimited);
  EXPECT_EQ(kind_of(503, "{}"), LlmErrorKind::ProviderUnavailable);
  EXPECT_EQ(kind_of(400, "{}"), LlmErrorKind::InvalidRequest);
  EXPECT_TRUE(server.auth.back().empty());

  OpenAiCompatibleProvider dead({"http://127.0.0.1:1/v1", "m", "", 1});
  try {
    dead.complete(request("x"));
    FAIL();
  } catch (const LlmError& e) {
    EXPECT_EQ(e.kind(), LlmErrorKind::ProviderUnavailable);
  }
  EXPECT_THROW(OpenAiCompatibleProvider({"localhost:80", "m", "", 1}), ConfigError);
}

TEST(OpenAi, GatewayRetriesServerErrors) {
  FakeServer server;
  server.status = 503;
  server.reply = "{}";
  Gateway gw(std::make_shared<OpenAiCompatibleProvider>(
      OpenAiCompatibleProvider::Options{server.base_url(), "m", "", 5}));
  gw.set_sleeper([](auto) {});
  EXPECT_THROW(gw.complete(request("x")), ProviderExhausted);
  EXPECT_EQ(server.bodies.size(), 4u);
}

TEST(Profile, ParseAndSecrets) {
  auto dir = scratch("profiles");
  fs::create_directories(dir);
  write_file(dir / "mock.json", R"({"provider":"mock","rules":"rules.jsonl","params":{"temperature":0.2}})");
  auto p = load_profile(dir / "mock.json");
  EXPECT_EQ(p.rules, dir / "rules.jsonl");
  EXPECT_EQ(p.params.temperature, 0.2);
  EXPECT_EQ(p.params.top_p, 0.9);

  EXPECT_THROW(parse_profile(json{{"provider", "openai"}, {"base_url", "http://x/v1"}, {"api_key", "sk"}}),
               ConfigError);
  EXPECT_THROW(parse_profile(json{{"provider", "carrier-pigeon"}}), ConfigError);
  EXPECT_THROW(parse_profile(json{{"provider", "mock"}}), ConfigError);
  EXPECT_THROW(parse_profile(json{{"provider", "mock"}, {"rules", "r"}, {"params", {{"top_p", 2}}}}), ConfigError);
  EXPECT_THROW(load_profile(dir / "missing.json"), ConfigError);

  auto live = parse_profile(json{{"provider", "openai"},
                                 {"base_url", "http://127.0.0.1:9/v1"},
                                 {"model", "m"},
                                 {"api_key_env", "TASKBENCH_TEST_UNSET_KEY"},
                                 {"retry_backoff_ms", {10, 20}}});
  EXPECT_EQ(live.gateway.retry.backoff.size(), 2u);
  ::unsetenv("TASKBENCH_TEST_UNSET_KEY");
  EXPECT_THROW(make_provider(live), ConfigError);
  ::setenv("TASKBENCH_TEST_UNSET_KEY", "sk-from-env", 1);
  EXPECT_EQ(make_provider(live)->name(), "openai:m");
}

TEST(ExtractCode, SingleFence) {
  EXPECT_EQ(extract_code("Here you go:\n```python\ndef f():\n    return 1\n```\nEnjoy!\n"),
            "def f():\n    return 1\n");
}

TEST(ExtractCode, PlainCodeIsIdentity) {
  std::string code = "import os\n\ndef f(x):\n    \"\"\"Doc.\n\n    Returns the value.\n    \"\"\"\n    return x\n";
  EXPECT_EQ(extract_code(code), code);
  EXPECT_EQ(extract_code("no code here at all"), "no code here at all");
  EXPECT_EQ(extract_code(""), "");
}

TEST(ExtractCode, FirstOfTwoFences) {
  std::string text =
      "First version:\n```python\ndef a():\n    return 1\n```\n"
      "Alternative:\n```\ndef b():\n    return 2\n```\n";
  EXPECT_EQ(extract_code(text), "def a():\n    return 1\n");
}

TEST(ExtractCode, UnfencedProseAroundCode) {
  std::string text =
      "Sure! Here is the implementation you asked for.\n\n"
      "import math\n\n"
      "def area(r):\n"
      "    return math.pi * r ** 2\n\n"
      "This computes the area of a circle.\n";
  EXPECT_EQ(extract_code(text), "import math\n\ndef area(r):\n    return math.pi * r ** 2\n");
}

TEST(ExtractCode, UnterminatedFence) {
  EXPECT_EQ(extract_code("```python\ndef f():\n    return 1\n"), "def f():\n    return 1\n");
}

TEST(ExtractCode, Idempotent) {
  std::mt19937 rng(17);
  const std::vector<std::string> pieces = {
      "```python",       "```",          "def f(x):",        "    return x",  "",
      "Here is code:",   "Note: fast",   "x = 1",            "# comment",     "\"\"\"",
      "Explanation of the approach.", "print(x)", "    \"\"\"Doc line.", "import os", "1. First step",
      ")",               "y: int = 2",   "Example (see below)"};
  for (int iter = 0; iter < 3000; ++iter) {
    std::string t;
    int n = static_cast<int>(rng() % 14);
    for (int i = 0; i < n; ++i) t += pieces[rng() % pieces.size()] + "\n";
    auto once = extract_code(t);
    ASSERT_EQ(extract_code(once), once) << "input:\n" << t;
  }
}
