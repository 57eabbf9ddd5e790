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

#include <array>
#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taskbench/executor.hpp"
#include "taskbench/llm.hpp"
#include "taskbench/metrics.hpp"
#include "taskbench/task.hpp"

namespace taskbench::curation {

enum class CurationErrorKind { UnresolvedSlot, LeakageDetected, InvalidInput };

class CurationError : public Error {
 public:
  CurationError(CurationErrorKind kind, std::string subject, const std::string& what)
      : Error(what), kind_(kind), subject_(std::move(subject)) {}
  CurationErrorKind kind() const { return kind_; }
  /// Slot name or task id.
  const std::string& subject() const { return subject_; }

 private:
  CurationErrorKind kind_;
  std::string subject_;
};

enum class TemplateName { TaskPrompt, ImportExample, TestPrompt, TestExample };

inline constexpr std::array<TemplateName, 4> kTemplateOrder = {
    TemplateName::TaskPrompt, TemplateName::ImportExample, TemplateName::TestPrompt,
    TemplateName::TestExample};

/// File stem used when loading overrides, e.g. "task_prompt".
std::string_view template_file_stem(TemplateName n);

struct PromptTemplate {
  TemplateName name;
  std::string body;
};

struct Templates {
  std::array<PromptTemplate, 4> parts;

  /// The data-generation scaffold, with a source-context header ahead of
  /// the task prompt.
  static Templates defaults();
  /// Defaults overridden by `<dir>/<stem>.txt` where present.
  static Templates load(const std::filesystem::path& dir);
};

/// Fills {domain}, {model_name}, {description}, {example_code} and
/// {metrics}. Throws UnresolvedSlot when a required value is empty.
std::string render_generation_prompt(const task::SourceMeta& source, const Templates& templates);

/// Seven-label taxonomy lookup; nullopt sends the source to quarantine.
std::optional<task::Category> map_domain(std::string_view domain);

enum class Stage { Generated, Stage1Pass, BenchmarkPass, Rejected };
std::string_view stage_name(Stage s);
Stage parse_stage(std::string_view s);

struct CandidateRecord {
  std::string candidate_id;
  task::SourceMeta source;
  task::Category category = task::Category::NLP;
  std::string instruction;
  std::string file_text;
  Stage stage = Stage::Generated;
  /// The run that decided the current stage.
  std::optional<sandbox::ExecutionReport> report;
  /// Re-run at benchmark selection, for Stage1Pass and above.
  std::optional<sandbox::ExecutionReport> selection_report;
  std::optional<std::string> reason;
  /// Passed a case at stage 1 that it failed at selection.
  bool flaky = false;

  bool operator==(const CandidateRecord&) const = default;
};

nlohmann::json to_json(const CandidateRecord& r);
CandidateRecord candidate_from_json(const nlohmann::json& j);

struct CurationOptions {
  bool piecewise = true;
  int candidates_per_source = 1;
  int workers = 1;
  sandbox::SandboxLimits limits;
  llm::GenerationParams params;
  std::optional<std::string> system;
};

/// Parses and validates an assembled file. Returns a Generated record, or a
/// Rejected one with the reason.
CandidateRecord make_candidate(std::string candidate_id, const task::SourceMeta& source,
                               task::Category category, std::string instruction,
                               std::string file_text);

/// Asks for description, solution and tests one call at a time (tags
/// curate.description / curate.solution / curate.tests), or the whole file at
/// once (curate.file) when piecewise is off. Provider failures reject the
/// record with reason "provider: ...".
CandidateRecord generate_candidate(const task::SourceMeta& source, task::Category category,
                                   std::string candidate_id, llm::Gateway& gateway,
                                   const Templates& templates, const CurationOptions& opts);

/// The task a Generated (or later) record describes.
task::TaskSpec to_task(const CandidateRecord& r);

struct StageCounts {
  std::size_t executed = 0;
  std::size_t passed = 0;
};

/// Runs every Generated record once: any case passing makes it Stage1Pass,
/// otherwise Rejected. Sandbox failures reject with the error as reason.
StageCounts filter_stage1(std::span<CandidateRecord> records, const sandbox::Sandbox& sandbox,
                          const sandbox::SandboxLimits& limits, int workers,
                          const std::atomic<bool>* stop = nullptr);

/// Re-runs every Stage1Pass record without a selection run; all cases
/// passing makes it BenchmarkPass. Regressions are flagged flaky.
StageCounts select_benchmark(std::span<CandidateRecord> records, const sandbox::Sandbox& sandbox,
                             const sandbox::SandboxLimits& limits, int workers,
                             const std::atomic<bool>* stop = nullptr);

struct Funnel {
  std::size_t generated = 0;  // every record, rejected ones included
  std::size_t stage1 = 0;
  std::size_t benchmark = 0;
  std::size_t flaky = 0;
  std::size_t quarantined = 0;
};

Funnel count_funnel(std::span<const CandidateRecord> records, std::size_t quarantined = 0);
std::string render_funnel(const Funnel& f, metrics::Format format);

enum class ExportPolicy { BenchmarkOnly, Stage1AndAbove };
ExportPolicy parse_policy(std::string_view s);

struct TrainingPair {
  std::string instruction;  // signature and docstring
  std::string completion;   // implementation section
  std::string task_id;
};

/// Throws LeakageDetected when the implementation shows up in its own
/// instruction (compared with whitespace collapsed).
TrainingPair training_pair(const task::TaskSpec& task);
/// One JSON object per line. Throws InvalidInput on an empty corpus.
std::string export_training_pairs(std::span<const task::TaskSpec> tasks);

/// Append-only record log; the last line for an id wins on load.
class CurationJournal {
 public:
  explicit CurationJournal(std::filesystem::path path) : path_(std::move(path)) {}
  void record(const CandidateRecord& r);
  std::map<std::string, CandidateRecord> load() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
};

struct QuarantineEntry {
  std::size_t source_index = 0;
  task::SourceMeta source;
  std::string reason;
};

struct PipelineResult {
  std::vector<CandidateRecord> records;  // sorted by candidate id
  std::vector<QuarantineEntry> quarantine;
  Funnel funnel;
  std::size_t provider_failures = 0;
  std::size_t gateway_calls = 0;
};

std::vector<task::SourceMeta> load_sources(const std::filesystem::path& jsonl);

/// `<index>-<model slug>-<k>`, stable across runs for the same source list.
std::string candidate_id(std::size_t source_index, const task::SourceMeta& source, int k);

/// Generation, stage-1 filtering and selection over `sources`, resuming from
/// `journal` when it already holds records.
PipelineResult run_pipeline(std::span<const task::SourceMeta> sources, llm::Gateway& gateway,
                            const sandbox::Sandbox& sandbox, const Templates& templates,
                            const CurationOptions& opts, CurationJournal& journal,
                            const std::atomic<bool>* stop = nullptr);

/// Benchmark tasks in id order, capped at `limit` when given.
std::vector<task::TaskSpec> benchmark_tasks(std::span<const CandidateRecord> records,
                                            std::optional<std::size_t> limit = std::nullopt);
std::vector<task::TaskSpec> stage1_tasks(std::span<const CandidateRecord> records);

}  // namespace taskbench::curation
