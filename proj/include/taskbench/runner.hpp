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

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "taskbench/wire.hpp"

namespace taskbench::sandbox {

using EventSink = std::function<void(const RunEvent&)>;

/// Executes one task file and reports the run as wire events.
class Runner {
 public:
  virtual ~Runner() = default;
  /// Emits `start line* exit` to `sink`. Throws SandboxError when the runner
  /// itself is unusable or breaks the protocol.
  virtual void run(const RunRequest& req, const EventSink& sink) const = 0;
  virtual std::string name() const = 0;
};

/// Runs the task file directly with a local interpreter. Same observable
/// behaviour as the in-sandbox shim, minus container isolation.
class ProcessRunner : public Runner {
 public:
  struct Options {
    std::vector<std::string> interpreter{"python3"};
    /// Pip cache shared by runs that are allowed to install packages.
    std::filesystem::path install_cache;
  };

  ProcessRunner() = default;
  explicit ProcessRunner(Options opts) : opts_(std::move(opts)) {}

  void run(const RunRequest& req, const EventSink& sink) const override;
  std::string name() const override { return "process"; }

 private:
  Options opts_;
};

/// Spawns an external runner (`runner --json` by default), writes the request
/// to its stdin and relays the JSON Lines events it prints.
class ShimRunner : public Runner {
 public:
  explicit ShimRunner(std::vector<std::string> argv = {"runner", "--json"}, double grace_s = 30.0)
      : argv_(std::move(argv)), grace_s_(grace_s) {}

  void run(const RunRequest& req, const EventSink& sink) const override;
  std::string name() const override { return "shim"; }

 private:
  std::vector<std::string> argv_;
  double grace_s_;
};

/// Replays canned event streams chosen by the task file's content. Used for
/// offline tests and dry runs.
class ScriptedRunner : public Runner {
 public:
  struct Rule {
    std::string contains;        // substring of the task file, or empty
    std::string program_sha256;  // digest of the task file, or empty
    std::vector<RunEvent> events;
  };

  explicit ScriptedRunner(std::vector<Rule> rules) : rules_(std::move(rules)) {}
  /// One JSON rule per line: {"contains"|"program_sha256": ..., "events": [...]}.
  /// A rule with neither key matches everything.
  static ScriptedRunner from_file(const std::filesystem::path& path);

  void run(const RunRequest& req, const EventSink& sink) const override;
  std::string name() const override { return "scripted"; }

 private:
  std::vector<Rule> rules_;
};

/// "process", "shim[:argv...]" (space separated) or "scripted:<rules.jsonl>".
std::shared_ptr<Runner> make_runner(const std::string& spec);

}  // namespace taskbench::sandbox
