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

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <thread>

#include "taskbench/corpus.hpp"
#include "taskbench/curation.hpp"
#include "taskbench/fileio.hpp"
#include "taskbench/report_io.hpp"
#include "taskbench/text.hpp"

namespace taskbench::curation {

using nlohmann::json;
using sandbox::ExecutionReport;

namespace {

std::string strip_quotes(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && (s.front() == '"' || s.front() == '\'' || s.front() == '`')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == '"' || s.back() == '\'' || s.back() == '`')) s.remove_suffix(1);
  return std::string(text::trim(s));
}

std::string ensure_newline(std::string s) {
  if (!s.empty() && s.back() != '\n') s.push_back('\n');
  return s;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (auto i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  int k = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  std::vector<std::thread> threads;
  for (int t = 1; t < k; ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
}

std::string function_text(const task::TaskSpec& t) {
  return t.sections.signature + t.sections.docstring + t.sections.implementation;
}

std::vector<std::size_t> passed_cases(const ExecutionReport& r) {
  std::vector<std::size_t> out;
  for (const auto& v : r.verdicts) {
    if (v.status == sandbox::VerdictStatus::Passed) out.push_back(static_cast<std::size_t>(v.index));
  }
  return out;
}

// Executes the records picked by `want` and hands each report to `apply`.
template <class Want, class Apply>
StageCounts run_stage(std::span<CandidateRecord> records, const sandbox::Sandbox& sb,
                      const sandbox::SandboxLimits& limits, int workers, int attempt,
                      const std::atomic<bool>* stop, Want want, Apply apply) {
  std::vector<task::TaskSpec> tasks;
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!want(records[i])) continue;
    try {
      tasks.push_back(to_task(records[i]));
      owner.push_back(i);
    } catch (const Error& e) {
      records[i].stage = Stage::Rejected;
      records[i].reason = e.what();
    }
  }
  std::vector<sandbox::Job> jobs;
  std::map<std::string, std::size_t> by_id;
  for (std::size_t j = 0; j < tasks.size(); ++j) {
    jobs.push_back({&tasks[j], function_text(tasks[j]), attempt});
    by_id[tasks[j].id] = owner[j];
  }
  StageCounts counts;
  for (auto& report : sandbox::run_batch(sb, jobs, limits, workers, stop)) {
    auto& rec = records[by_id.at(report.task_id)];
    ++counts.executed;
    if (apply(rec, std::move(report))) ++counts.passed;
  }
  return counts;
}

}  // namespace

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::Generated: return "generated";
    case Stage::Stage1Pass: return "stage1_pass";
    case Stage::BenchmarkPass: return "benchmark_pass";
    case Stage::Rejected: return "rejected";
  }
  return "";
}

Stage parse_stage(std::string_view s) {
  for (auto st : {Stage::Generated, Stage::Stage1Pass, Stage::BenchmarkPass, Stage::Rejected}) {
    if (stage_name(st) == s) return st;
  }
  throw Error(fmt::format("unknown candidate stage '{}'", s));
}

json to_json(const CandidateRecord& r) {
  json j = {{"candidate_id", r.candidate_id},
            {"source", r.source},
            {"category", task::category_label(r.category)},
            {"instruction", r.instruction},
            {"file_text", r.file_text},
            {"stage", stage_name(r.stage)},
            {"flaky", r.flaky}};
  j["report"] = r.report ? json(*r.report) : json();
  j["selection_report"] = r.selection_report ? json(*r.selection_report) : json();
  j["reason"] = r.reason ? json(*r.reason) : json();
  return j;
}

CandidateRecord candidate_from_json(const json& j) {
  CandidateRecord r;
  r.candidate_id = j.at("candidate_id").get<std::string>();
  r.source = j.at("source").get<task::SourceMeta>();
  r.category = task::parse_category(j.at("category").get<std::string>());
  r.instruction = j.at("instruction").get<std::string>();
  r.file_text = j.at("file_text").get<std::string>();
  r.stage = parse_stage(j.at("stage").get<std::string>());
  r.flaky = j.value("flaky", false);
  if (j.contains("report") && !j["report"].is_null()) r.report = j["report"].get<ExecutionReport>();
  if (j.contains("selection_report") && !j["selection_report"].is_null()) {
    r.selection_report = j["selection_report"].get<ExecutionReport>();
  }
  if (j.contains("reason") && !j["reason"].is_null()) r.reason = j["reason"].get<std::string>();
  return r;
}

task::TaskSpec to_task(const CandidateRecord& r) {
  task::TaskMetadata meta{r.candidate_id, std::string(task::category_label(r.category)),
                          std::nullopt, r.source};
  if (!text::is_blank(r.instruction)) meta.instruction = r.instruction;
  return task::parse_task_file(r.file_text, meta);
}

CandidateRecord make_candidate(std::string candidate_id, const task::SourceMeta& source,
                               task::Category category, std::string instruction,
                               std::string file_text) {
  CandidateRecord r;
  r.candidate_id = std::move(candidate_id);
  r.source = source;
  r.category = category;
  r.instruction = std::move(instruction);
  try {
    auto sections = task::split_sections(file_text);
    r.file_text = sections.heuristic ? task::render_task_file(sections) : std::move(file_text);
    auto spec = to_task(r);
    if (text::is_blank(r.instruction)) r.instruction = spec.instruction;
    auto violations = task::validate_task(spec);
    if (!violations.empty()) {
      r.stage = Stage::Rejected;
      r.reason = task::describe(violations.front());
    }
  } catch (const task::ParseError& e) {
    if (r.file_text.empty()) r.file_text = std::move(file_text);
    r.stage = Stage::Rejected;
    r.reason = e.what();
  }
  return r;
}

CandidateRecord generate_candidate(const task::SourceMeta& source, task::Category category,
                                   std::string id, llm::Gateway& gateway,
                                   const Templates& templates, const CurationOptions& opts) {
  std::string base = render_generation_prompt(source, templates);
  auto ask = [&](std::string prompt, std::string tag) {
    return gateway.complete({opts.system, std::move(prompt), opts.params, std::move(tag)}).text;
  };
  try {
    if (!opts.piecewise) {
      auto file = llm::extract_code(ask(
          base + "\nReply with the complete file (install block, imports, the documented function, "
                 "the test function and the line that runs it) in a single ```python code block.\n",
          "curate.file"));
      return make_candidate(std::move(id), source, category, "", ensure_newline(file));
    }
    auto description = strip_quotes(ask(
        base + "\nStart with step 1 only: reply with the one-sentence requirement and nothing else.\n",
        "curate.description"));
    auto solution = ensure_newline(llm::extract_code(ask(
        fmt::format("{}\nRequirement: {}\n\nWrite the install block (as in the import example), the "
                    "imports and the documented function that implements the requirement, in a "
                    "single ```python code block. Do not write tests yet.\n",
                    base, description),
        "curate.solution")));
    auto tests = ensure_newline(llm::extract_code(ask(
        fmt::format("{}\nRequirement: {}\n\nSolution:\n```python\n{}```\n\nWrite the test function "
                    "for this solution following the test prompt and example, and the line that "
                    "runs it, in a single ```python code block.\n",
                    base, description, solution),
        "curate.tests")));
    return make_candidate(std::move(id), source, category, description, solution + "\n\n" + tests);
  } catch (const llm::LlmError& e) {
    CandidateRecord r;
    r.candidate_id = std::move(id);
    r.source = source;
    r.category = category;
    r.stage = Stage::Rejected;
    r.reason = fmt::format("provider: {}", e.what());
    return r;
  }
}

StageCounts filter_stage1(std::span<CandidateRecord> records, const sandbox::Sandbox& sb,
                          const sandbox::SandboxLimits& limits, int workers,
                          const std::atomic<bool>* stop) {
  return run_stage(
      records, sb, limits, workers, 0, stop,
      [](const CandidateRecord& r) { return r.stage == Stage::Generated; },
      [](CandidateRecord& r, ExecutionReport report) {
        bool pass = report.any_passed();
        r.stage = pass ? Stage::Stage1Pass : Stage::Rejected;
        if (!pass) {
          r.reason = report.error ? fmt::format("sandbox: {}", *report.error)
                                  : std::string("no test case passed");
        }
        r.report = std::move(report);
        return pass;
      });
}

StageCounts select_benchmark(std::span<CandidateRecord> records, const sandbox::Sandbox& sb,
                             const sandbox::SandboxLimits& limits, int workers,
                             const std::atomic<bool>* stop) {
  return run_stage(
      records, sb, limits, workers, 1, stop,
      [](const CandidateRecord& r) { return r.stage == Stage::Stage1Pass && !r.selection_report; },
      [](CandidateRecord& r, ExecutionReport report) {
        bool pass = report.all_passed();
        if (r.report) {
          auto before = passed_cases(*r.report);
          auto after = passed_cases(report);
          r.flaky = !std::includes(after.begin(), after.end(), before.begin(), before.end());
        }
        if (pass) {
          r.stage = Stage::BenchmarkPass;
          r.report = report;
        } else {
          r.reason = r.flaky ? "regressed at selection" : "not every test case passed";
        }
        r.selection_report = std::move(report);
        return pass;
      });
}

Funnel count_funnel(std::span<const CandidateRecord> records, std::size_t quarantined) {
  Funnel f;
  f.quarantined = quarantined;
  for (const auto& r : records) {
    ++f.generated;
    if (r.stage == Stage::Stage1Pass || r.stage == Stage::BenchmarkPass) ++f.stage1;
    if (r.stage == Stage::BenchmarkPass) ++f.benchmark;
    if (r.flaky) ++f.flaky;
  }
  return f;
}

std::string render_funnel(const Funnel& f, metrics::Format format) {
  auto pct = [](std::size_t a, std::size_t b) {
    return b == 0 ? std::string("–") : fmt::format("{:.1f}", metrics::round_half_up(100.0 * a / b, 1));
  };
  struct Row {
    std::string_view stage;
    std::size_t count;
    std::string of_prev;
    std::string of_generated;
  };
  std::vector<Row> rows = {
      {"Generated", f.generated, "–", pct(f.generated, f.generated)},
      {"Stage1", f.stage1, pct(f.stage1, f.generated), pct(f.stage1, f.generated)},
      {"Benchmark", f.benchmark, pct(f.benchmark, f.stage1), pct(f.benchmark, f.generated)},
  };
  switch (format) {
    case metrics::Format::Json: {
      json j = {{"generated", f.generated}, {"stage1", f.stage1},     {"benchmark", f.benchmark},
                {"flaky", f.flaky},         {"quarantined", f.quarantined}};
      return j.dump(2) + "\n";
    }
    case metrics::Format::Csv: {
      std::string out = "stage,count,pct_of_previous,pct_of_generated\n";
      for (const auto& r : rows) {
        out += fmt::format("{},{},{},{}\n", r.stage, r.count, r.of_prev == "–" ? "" : r.of_prev,
                           r.of_generated == "–" ? "" : r.of_generated);
      }
      return out;
    }
    case metrics::Format::Markdown: break;
  }
  std::string out = "| Stage | Count | % of previous | % of generated |\n|---|---:|---:|---:|\n";
  for (const auto& r : rows) {
    out += fmt::format("| {} | {} | {} | {} |\n", r.stage, r.count, r.of_prev, r.of_generated);
  }
  out += fmt::format("\nFlaky: {}  Quarantined sources: {}\n", f.flaky, f.quarantined);
  return out;
}

ExportPolicy parse_policy(std::string_view s) {
  if (s == "" || s == "benchmark") return ExportPolicy::BenchmarkOnly;
  if (s == "stage1") return ExportPolicy::Stage1AndAbove;
  throw ConfigError(fmt::format("unknown export policy '{}' (benchmark or stage1)", s));
}

TrainingPair training_pair(const task::TaskSpec& t) {
  TrainingPair p{t.sections.signature + t.sections.docstring, t.sections.implementation, t.id};
  auto body = text::collapse_whitespace(text::trim(p.completion));
  if (!body.empty() && text::collapse_whitespace(p.instruction).find(body) != std::string::npos) {
    throw CurationError(CurationErrorKind::LeakageDetected, t.id,
                        fmt::format("{}: implementation appears in its own instruction", t.id));
  }
  return p;
}

std::string export_training_pairs(std::span<const task::TaskSpec> tasks) {
  if (tasks.empty()) {
    throw CurationError(CurationErrorKind::InvalidInput, "", "no tasks to export");
  }
  std::string out;
  for (const auto& t : tasks) {
    auto p = training_pair(t);
    json j = {{"task_id", p.task_id}, {"instruction", p.instruction}, {"completion", p.completion}};
    out += j.dump() + "\n";
  }
  return out;
}

void CurationJournal::record(const CandidateRecord& r) {
  std::lock_guard lock(mu_);
  append_line(path_, to_json(r).dump());
}

std::map<std::string, CandidateRecord> CurationJournal::load() const {
  std::map<std::string, CandidateRecord> out;
  if (!std::filesystem::exists(path_)) return out;
  for (const auto& line : read_lines(path_)) {
    if (text::is_blank(line)) continue;
    auto r = candidate_from_json(json::parse(line));
    auto id = r.candidate_id;
    out.insert_or_assign(std::move(id), std::move(r));
  }
  return out;
}

std::vector<task::SourceMeta> load_sources(const std::filesystem::path& path) {
  std::vector<task::SourceMeta> out;
  int n = 0;
  for (const auto& line : read_lines(path)) {
    ++n;
    if (text::is_blank(line)) continue;
    try {
      out.push_back(json::parse(line).get<task::SourceMeta>());
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("{}:{}: bad source record: {}", path.string(), n, e.what()));
    }
  }
  return out;
}

std::string candidate_id(std::size_t source_index, const task::SourceMeta& source, int k) {
  std::string slug;
  for (unsigned char c : source.model_name) {
    if (std::isalnum(c)) {
      slug.push_back(static_cast<char>(std::tolower(c)));
    } else if (!slug.empty() && slug.back() != '-') {
      slug.push_back('-');
    }
  }
  while (!slug.empty() && slug.back() == '-') slug.pop_back();
  if (slug.empty()) slug = "source";
  return fmt::format("{:04}-{}-{}", source_index, slug, k);
}

PipelineResult run_pipeline(std::span<const task::SourceMeta> sources, llm::Gateway& gateway,
                            const sandbox::Sandbox& sb, const Templates& templates,
                            const CurationOptions& opts, CurationJournal& journal,
                            const std::atomic<bool>* stop) {
  if (opts.candidates_per_source < 1) throw ConfigError("candidates per source must be at least 1");
  PipelineResult res;
  auto known = journal.load();

  struct Pending {
    std::size_t source_index;
    task::Category category;
    std::string id;
  };
  std::vector<Pending> pending;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    auto cat = map_domain(sources[i].domain);
    if (!cat) {
      res.quarantine.push_back({i, sources[i], fmt::format("unmapped domain '{}'", sources[i].domain)});
      continue;
    }
    for (int k = 0; k < opts.candidates_per_source; ++k) {
      auto id = candidate_id(i, sources[i], k);
      if (auto it = known.find(id); it != known.end()) {
        res.records.push_back(it->second);
      } else {
        pending.push_back({i, *cat, std::move(id)});
      }
    }
  }

  std::size_t before = 0;
  for (const auto& e : gateway.request_log()) before += static_cast<std::size_t>(e.calls);

  // Generate in worker-sized chunks and journal each chunk in order, so the
  // journal is deterministic and a crash loses only the chunk in flight.
  std::size_t chunk = static_cast<std::size_t>(std::max(1, opts.workers));
  for (std::size_t at = 0; at < pending.size(); at += chunk) {
    if (stop && stop->load()) break;
    std::size_t n = std::min(chunk, pending.size() - at);
    std::vector<CandidateRecord> made(n);
    parallel_for(n, opts.workers, [&](std::size_t j) {
      const auto& p = pending[at + j];
      made[j] = generate_candidate(sources[p.source_index], p.category, p.id, gateway, templates, opts);
    });
    for (auto& r : made) {
      // Provider failures stay out of the journal so a resume retries them.
      if (r.reason && r.reason->starts_with("provider: ")) {
        ++res.provider_failures;
      } else {
        journal.record(r);
      }
      res.records.push_back(std::move(r));
    }
  }
  std::sort(res.records.begin(), res.records.end(),
            [](const auto& a, const auto& b) { return a.candidate_id < b.candidate_id; });

  auto journal_changed = [&](const std::vector<CandidateRecord>& snapshot) {
    for (std::size_t i = 0; i < res.records.size(); ++i) {
      if (!(res.records[i] == snapshot[i])) journal.record(res.records[i]);
    }
  };
  auto snapshot = res.records;
  filter_stage1(res.records, sb, opts.limits, opts.workers, stop);
  journal_changed(snapshot);
  snapshot = res.records;
  select_benchmark(res.records, sb, opts.limits, opts.workers, stop);
  journal_changed(snapshot);

  std::size_t after = 0;
  for (const auto& e : gateway.request_log()) after += static_cast<std::size_t>(e.calls);
  res.gateway_calls = after - before;
  res.funnel = count_funnel(res.records, res.quarantine.size());
  return res;
}

std::vector<task::TaskSpec> benchmark_tasks(std::span<const CandidateRecord> records,
                                            std::optional<std::size_t> limit) {
  std::vector<task::TaskSpec> out;
  for (const auto& r : records) {
    if (limit && out.size() >= *limit) break;
    if (r.stage == Stage::BenchmarkPass) out.push_back(to_task(r));
  }
  return out;
}

std::vector<task::TaskSpec> stage1_tasks(std::span<const CandidateRecord> records) {
  std::vector<task::TaskSpec> out;
  for (const auto& r : records) {
    if (r.stage == Stage::Stage1Pass || r.stage == Stage::BenchmarkPass) out.push_back(to_task(r));
  }
  return out;
}

}  // namespace taskbench::curation
