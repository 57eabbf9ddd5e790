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

// One PASS/FAIL line per primary acceptance criterion. Exit status is the
// number of failures.

#include <fmt/format.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "support/candidates.hpp"
#include "taskbench/cli.hpp"
#include "taskbench/corpus.hpp"
#include "taskbench/curation.hpp"
#include "taskbench/fileio.hpp"
#include "taskbench/metrics.hpp"
#include "taskbench/repair.hpp"
#include "taskbench/report_io.hpp"
#include "taskbench/runner.hpp"
#include "taskbench/text.hpp"

namespace fs = std::filesystem;
using namespace taskbench;
using nlohmann::json;
using sandbox::OutStream;
using sandbox::RunEvent;

namespace {

const fs::path kData = TASKBENCH_TEST_DATA;

int g_failures = 0;

// `body` returns an empty string on success, otherwise why it failed.
void criterion(const std::string& name, double limit_s, const std::function<std::string()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  std::string why;
  try {
    why = body();
  } catch (const std::exception& e) {
    why = fmt::format("exception: {}", e.what());
  }
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (why.empty() && s >= limit_s) why = fmt::format("took {:.2f} s, limit {:.0f} s", s, limit_s);
  bool pass = why.empty();
  if (!pass) ++g_failures;
  std::cout << fmt::format("{} {} ({:.3f} s){}{}\n", pass ? "PASS" : "FAIL", name, s, pass ? "" : ": ", why)
            << std::flush;
}

fs::path scratch(const std::string& name) {
  auto d = fs::temp_directory_path() / fmt::format("taskbench-accept-{}-{}", name, ::getpid());
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string relative_increase_cells() {
  const std::vector<std::tuple<double, double, double>> cells = {
      {9.16, 13.03, 42.25}, {46.84, 60.63, 29.44}, {1.23, 1.83, 48.78}, {30.49, 34.15, 12.00}, {85.80, 86.18, 0.44}};
  for (auto [base, treated, want] : cells) {
    double got = metrics::relative_increase(base, treated);
    if (got != want) return fmt::format("({}, {}) gave {}, published {}", base, treated, got, want);
  }
  return "";
}

std::string code_line_ranks() {
  const std::vector<std::tuple<std::string, double, int>> rows = {
      {"GPT-3.5-turbo-1106", 8.6, 1},   {"llama-2-7b", 16.2, 5},           {"llama-2-13b", 18.5, 7},
      {"llama-2-70b", 13.1, 4},         {"codellama-7b-python", 21.5, 9},  {"codellama-13b-python", 18.9, 8},
      {"codellama-34b-python", 18.4, 6}, {"llama-3-8b-instruct", 11.02, 3}, {"llama-3-8b-instruct w/sft", 9.32, 2}};
  std::vector<metrics::EvalSummary> in;
  std::map<std::string, int> want;
  for (const auto& [m, cl, rank] : rows) {
    metrics::EvalSummary s;
    s.model = m;
    s.mean_cl = cl;
    in.push_back(s);
    want[m] = rank;
  }
  auto ranked = metrics::rank_models(in);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (want.at(ranked[i].model) != static_cast<int>(i + 1)) {
      return fmt::format("{} ranked {}, published {}", ranked[i].model, i + 1, want.at(ranked[i].model));
    }
  }
  return ranked.size() == rows.size() ? "" : "lost rows";
}

std::string categories() {
  using task::Category;
  std::map<Category, std::size_t> counts = {
      {Category::NLP, 383},       {Category::ComputerVision, 50}, {Category::TabularData, 18},
      {Category::AudioSpeech, 17}, {Category::Classification, 12}, {Category::Multimodal, 9},
      {Category::ReinforcementLearning, 3}};
  const std::vector<double> want = {77.8, 10.2, 3.7, 3.5, 2.4, 1.8, 0.6};
  auto shares = metrics::category_distribution(counts);
  if (shares.size() != want.size()) return "wrong number of categories";
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (shares[i].percent != want[i]) {
      return fmt::format("{} gave {}, published {}", task::category_label(shares[i].category), shares[i].percent,
                         want[i]);
    }
  }
  return "";
}

std::string marker_fuzz() {
  std::mt19937 rng(20240);
  const std::vector<std::string> words = {"started.", "succeeded: ok", "failed: bad", "skipped"};
  const std::vector<std::string> noise = {"", "error: x", "Testing started.", "Test case [", "Traceback (most recent call last):"};
  std::vector<sandbox::ExecutionReport> batch;
  std::size_t batches = 0;
  for (int iter = 0; iter < 10000; ++iter) {
    int expected = 1 + static_cast<int>(rng() % 5);
    std::set<int> succ, fail;
    std::vector<RunEvent> events = {RunEvent::start()};
    std::string out;
    int n = static_cast<int>(rng() % 14);
    for (int k = 0; k < n; ++k) {
      std::string line;
      if (rng() % 4 == 0) {
        line = noise[rng() % noise.size()];
      } else {
        int idx = static_cast<int>(rng() % (expected + 2));
        const auto& w = words[rng() % words.size()];
        line = fmt::format("{}[{}/{}] {}", rng() % 2 ? "Test case " : "Testing case ", idx, expected, w);
        if (idx >= 1 && idx <= expected) {
          if (w.starts_with("succeeded")) succ.insert(idx);
          if (w.starts_with("failed")) fail.insert(idx);
        }
      }
      out += line + "\n";
      events.push_back(RunEvent::line(OutStream::Out, line));
    }
    events.push_back(RunEvent::exit(0, 0.0));
    bool both = false;
    for (int i = 1; i <= expected; ++i) both = both || (succ.count(i) && fail.count(i));

    bool raised = false;
    try {
      auto v = sandbox::parse_markers(out, expected);
      if (static_cast<int>(v.size()) != expected) return fmt::format("iteration {}: {} verdicts, want {}", iter, v.size(), expected);
    } catch (const sandbox::SandboxError& e) {
      raised = e.kind() == sandbox::SandboxErrorKind::ConflictingMarkers;
    }
    if (raised != both) return fmt::format("iteration {}: conflict raised={} but both terminals={}", iter, raised, both);

    auto report = sandbox::build_report(fmt::format("t{}", iter), 0, expected, events, 1 << 20);
    if (static_cast<int>(report.verdicts.size()) != expected) return fmt::format("iteration {}: report has wrong length", iter);
    batch.push_back(std::move(report));
    if (batch.size() == 1 + iter % 17 || iter == 9999) {
      if (metrics::sr_any(batch) < metrics::sr_all(batch)) return fmt::format("batch {}: SR@Any < SR@All", batches);
      ++batches;
      batch.clear();
    }
  }
  return "";
}

// A task whose function is fn_tNN; three cases.
task::TaskSpec agent_task(int t) {
  auto fn = fmt::format("fn_t{:02}", t);
  std::string file = fmt::format(
      "import subprocess\nrequirements = []\nfor package in requirements:\n"
      "    subprocess.run(['pip', 'install', '-U', package])\n\nimport math\n\n"
      "def {0}(a, b):\n    \"\"\"\n    Add two numbers.\n\n    Returns:\n        The sum.\n    \"\"\"\n"
      "    return a + b\n\n"
      "def test_{0}():\n    print(\"Testing started.\")\n"
      "    print(\"Testing case [1/3] started.\")\n    print(\"Test case [1/3] succeeded\")\n"
      "    print(\"Testing case [2/3] started.\")\n    print(\"Test case [2/3] succeeded\")\n"
      "    print(\"Testing case [3/3] started.\")\n    print(\"Test case [3/3] succeeded\")\n"
      "    print(\"Testing finished.\")\n\ntest_{0}()\n",
      fn);
  task::TaskMetadata meta{fmt::format("task-{:02}", t), "Tabular Data", std::nullopt, {}};
  return task::parse_task_file(file, meta);
}

std::vector<RunEvent> scripted_run(const std::string& statuses) {
  std::vector<RunEvent> ev = {RunEvent::start()};
  for (std::size_t i = 0; i < statuses.size(); ++i) {
    ev.push_back(RunEvent::line(OutStream::Out, fmt::format("Testing case [{}/3] started.", i + 1)));
    if (statuses[i] == 'P') {
      ev.push_back(RunEvent::line(OutStream::Out, fmt::format("Test case [{}/3] succeeded", i + 1)));
    } else {
      ev.push_back(RunEvent::line(OutStream::Out, fmt::format("Test case [{}/3] failed: wrong value", i + 1)));
      ev.push_back(RunEvent::line(OutStream::Out, "error: assertion failed"));
    }
  }
  ev.push_back(RunEvent::exit(0, 0.0));
  return ev;
}

std::string agent_monotonicity() {
  constexpr int kTasks = 20, kBudget = 2;
  // solve_at: 0, 1, 2, or never (-1)
  auto solve_at = [](int t) { return t % 4 == 3 ? -1 : t % 4; };
  std::vector<llm::MockProvider::Rule> rules;
  auto status = [&](int t, int v) {
    if (solve_at(t) >= 0 && v >= solve_at(t)) return "STATUS_PASS";
    return t % 2 ? "STATUS_PARTIAL" : "STATUS_FAIL";
  };
  auto program = [&](int t, int v) {
    return fmt::format("```python\ndef fn_t{0:02}(a, b):\n    # fn_t{0:02}_V{1} {2}\n    return a + b\n```\n", t, v, status(t, v));
  };
  std::vector<task::TaskSpec> tasks;
  for (int t = 0; t < kTasks; ++t) {
    tasks.push_back(agent_task(t));
    rules.push_back({"generate", fmt::format("def fn_t{:02}(", t), "", program(t, 0), std::nullopt});
    for (int v = 0; v < kBudget; ++v) {
      rules.push_back({"repair", fmt::format("fn_t{:02}_V{}", t, v), "", program(t, v + 1), std::nullopt});
    }
  }
  rules.push_back({"analyze", "", "", "The return value does not match the tests.", std::nullopt});

  auto runner = std::make_shared<sandbox::ScriptedRunner>(std::vector<sandbox::ScriptedRunner::Rule>{
      {"STATUS_PASS", "", scripted_run("PPP")},
      {"STATUS_PARTIAL", "", scripted_run("PFF")},
      {"STATUS_FAIL", "", scripted_run("FFF")}});
  sandbox::Sandbox sb(runner);
  llm::Gateway gw(std::make_shared<llm::MockProvider>(rules));
  repair::Agent agent(gw, sb, {kBudget, {}, {}, std::nullopt});

  std::vector<sandbox::ExecutionReport> reports;
  std::map<std::string, task::Category> cats;
  for (const auto& t : tasks) {
    auto s = agent.run(t);
    cats[t.id] = t.category;
    int i = std::stoi(t.id.substr(5));
    if (s.attempts.size() > kBudget + 1) return fmt::format("{}: {} attempts", t.id, s.attempts.size());
    repair::Outcome want = solve_at(i) < 0    ? repair::Outcome{repair::OutcomeKind::Exhausted, 0}
                           : solve_at(i) == 0 ? repair::Outcome{repair::OutcomeKind::SolvedAtZero, 0}
                                              : repair::Outcome{repair::OutcomeKind::SolvedByRepair, solve_at(i)};
    if (!(s.outcome == want)) {
      return fmt::format("{}: outcome {}, script says {}", t.id, repair::describe(s.outcome), repair::describe(want));
    }
    for (const auto& a : s.attempts) reports.push_back(a.report);
  }
  using metrics::Condition;
  auto base = metrics::summarize("mock", Condition::Original, metrics::select_final(reports, Condition::Original), cats);
  auto treated = metrics::summarize("mock", Condition::WithAgent, metrics::select_final(reports, Condition::WithAgent), cats);
  if (treated.sr_all < base.sr_all || treated.sr_any < base.sr_any) {
    return fmt::format("with agent {}/{} below original {}/{}", treated.sr_all, treated.sr_any, base.sr_all, base.sr_any);
  }
  // 5 of 20 solve at once; 15 of 20 within the budget.
  if (base.sr_all != 25.0 || treated.sr_all != 75.0) {
    return fmt::format("SR@All {} -> {}, script says 25 -> 75", base.sr_all, treated.sr_all);
  }
  return "";
}

std::string curation_funnel() {
  auto dir = scratch("funnel");
  struct Spec {
    std::string profile;  // empty: solution without tests
    int copies;
  };
  const std::vector<Spec> design = {{"PPP", 8}, {"PFP", 2}, {"PPF", 2}, {"FFP", 1}, {"FFF", 6}, {"PPX", 1},
                                    {"XPP", 1}, {"XXX", 1}, {"PXF", 1}, {"", 4},   {"PP", 2},  {"PPPP", 1}};
  std::vector<curation::CandidateRecord> pool;
  std::set<std::string> want_s1, want_bench, want_flaky, all_ids;
  for (const auto& d : design) {
    for (int k = 0; k < d.copies; ++k) {
      auto id = fmt::format("c{:02}-{}", pool.size(), d.profile.empty() ? "notests" : d.profile);
      auto text = d.profile.empty() ? fixtures::candidate_solution() : fixtures::candidate_file(d.profile, dir / id);
      pool.push_back(curation::make_candidate(id, {"Tabular Tabular Regression", "m", "Echo.", "", {}},
                                              task::Category::TabularData, "Echo a value.", text));
      all_ids.insert(id);
      bool well_formed = d.profile.size() == 3;
      bool any = d.profile.find_first_of("PX") != std::string::npos;
      bool all = d.profile == "PPP";
      if (well_formed && any) want_s1.insert(id);
      if (well_formed && all) want_bench.insert(id);
      if (well_formed && d.profile.find('X') != std::string::npos) want_flaky.insert(id);
    }
  }
  if (pool.size() != 30) return "pool is not 30 candidates";
  sandbox::Sandbox sb(std::make_shared<sandbox::ProcessRunner>());
  sandbox::SandboxLimits limits;
  limits.wall_clock_timeout_s = 30;
  curation::filter_stage1(pool, sb, limits, 2);
  curation::select_benchmark(pool, sb, limits, 2);

  std::set<std::string> generated, s1, bench, flaky;
  for (const auto& r : pool) {
    generated.insert(r.candidate_id);
    if (r.stage == curation::Stage::Stage1Pass || r.stage == curation::Stage::BenchmarkPass) s1.insert(r.candidate_id);
    if (r.stage == curation::Stage::BenchmarkPass) bench.insert(r.candidate_id);
    if (r.flaky) flaky.insert(r.candidate_id);
  }
  auto subset = [](const auto& a, const auto& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); };
  if (generated != all_ids) return "generated set differs";
  if (s1 != want_s1) return fmt::format("stage1 has {} candidates, design says {}", s1.size(), want_s1.size());
  if (bench != want_bench) return fmt::format("benchmark has {} candidates, design says {}", bench.size(), want_bench.size());
  if (!subset(bench, s1) || !subset(s1, generated)) return "stage sets are not nested";
  if (flaky != want_flaky) return fmt::format("{} flagged flaky, design says {}", flaky.size(), want_flaky.size());
  for (const auto& id : flaky) {
    if (bench.count(id)) return id + " is flaky but selected";
  }
  return "";
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file(e.path());
  }
  return out;
}

int quiet_cli(const std::vector<std::string>& args, std::string* err = nullptr) {
  std::ostringstream o, e;
  int code = cli::run(args, o, e);
  if (err) *err = e.str();
  return code;
}

std::string determinism() {
  auto dir = scratch("determinism");
  auto fence = [](const std::string& code) { return "```python\n" + code + "```\n"; };
  std::vector<json> rules = {
      {{"tag", "generate"}, {"contains", "def add_numbers("}, {"response", fence("def add_numbers(a, b):\n    return a + b\n")}},
      {{"tag", "generate"}, {"contains", "def clip_value("}, {"response", fence("def clip_value(x, lo, hi):\n    return max(lo, x)\n")}},
      {{"tag", "generate"}, {"contains", "def reverse_words("}, {"response", fence("def reverse_words(text):\n    return text\n")}},
      {{"tag", "analyze"}, {"response", "Compare the result with the docstring."}},
      {{"tag", "repair"}, {"contains", "def clip_value("}, {"response", fence("def clip_value(x, lo, hi):\n    return max(lo, min(hi, x))\n")}},
      {{"tag", "repair"}, {"contains", "def reverse_words("}, {"response", fence("def reverse_words(text):\n    return ' '.join(text.split(' ')[::-1])\n")}}};
  std::string lines;
  for (const auto& r : rules) lines += r.dump() + "\n";
  write_file(dir / "rules.jsonl", lines);
  write_file(dir / "mock.json", json{{"provider", "mock"}, {"model", "det"}, {"rules", "rules.jsonl"}}.dump());

  auto corpus = (kData / "corpus3").string();
  std::string err;
  if (int c = quiet_cli({"repair", "--corpus", corpus, "--profile", (dir / "mock.json").string(), "--no-install",
                         "--out", (dir / "rec").string(), "--seed", "11"},
                        &err);
      c != 0) {
    return fmt::format("recording run exited {}: {}", c, err);
  }
  fs::path recorded;
  for (const auto& e : fs::directory_iterator(dir / "rec" / "runs" / "det")) recorded = e.path();
  write_file(dir / "replay.json",
             json{{"provider", "replay"}, {"model", "det"}, {"journal", (recorded / "llm_journal.jsonl").string()}}.dump());
  for (int i = 0; i < 2; ++i) {
    if (int c = quiet_cli({"repair", "--corpus", corpus, "--profile", (dir / "replay.json").string(), "--no-install",
                           "--out", (dir / "replay").string(), "--seed", "11", "--workers", "2"},
                          &err);
        c != 0) {
      return fmt::format("replay run {} exited {}: {}", i, c, err);
    }
  }
  std::vector<fs::path> runs;
  for (const auto& e : fs::directory_iterator(dir / "replay" / "runs" / "det")) runs.push_back(e.path());
  if (runs.size() != 2) return fmt::format("expected two run directories, found {}", runs.size());
  auto a = tree(runs[0]), b = tree(runs[1]);
  if (a.size() < 5) return "run directory is missing artifacts";
  for (const auto& [name, bytes] : a) {
    auto it = b.find(name);
    if (it == b.end()) return name + " missing from the second run";
    if (it->second != bytes) return name + " differs between runs";
  }
  return a.size() == b.size() ? "" : "file sets differ";
}

// Needs a real provider and real tasks; nothing here can stand in for them.
std::string live_smoke() {
  const char* profile = std::getenv("TASKBENCH_LIVE_PROFILE");
  const char* corpus = std::getenv("TASKBENCH_LIVE_CORPUS");
  if (!profile || !corpus) {
    return "not run: no live provider configured (set TASKBENCH_LIVE_PROFILE and TASKBENCH_LIVE_CORPUS)";
  }
  auto dir = scratch("live");
  std::string err;
  int code = quiet_cli({"repair", "--corpus", corpus, "--profile", profile, "--out", dir.string(), "--budget", "1"}, &err);
  if (code != cli::kOk && code != cli::kProviderExhausted) return fmt::format("repair exited {}: {}", code, err);
  fs::path run;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.path().filename() == "sessions.jsonl") run = e.path().parent_path();
  }
  if (run.empty()) return "no session journal written";
  auto reports = sandbox::read_reports(run / "reports.jsonl");
  std::set<std::string> tasks;
  for (const auto& r : reports) {
    tasks.insert(r.task_id);
    if (r.verdicts.empty()) return r.task_id + ": no verdicts";
  }
  if (tasks.size() < 5) return fmt::format("only {} task(s) ran end to end", tasks.size());
  if (read_file(run / "llm_journal.jsonl").empty()) return "provider journal is empty";
  return "";
}

}  // namespace

int main() {
  criterion("relative-increase-cells", 1, relative_increase_cells);
  criterion("code-line-ranks", 1, code_line_ranks);
  criterion("category-percentages", 1, categories);
  criterion("marker-parser-properties", 30, marker_fuzz);
  criterion("agent-monotonicity", 60, agent_monotonicity);
  criterion("curation-funnel", 120, curation_funnel);
  criterion("repair-determinism", 120, determinism);
  criterion("live-smoke", 600, live_smoke);
  std::cout << fmt::format("{} failure(s)\n", g_failures);
  return g_failures;
}
