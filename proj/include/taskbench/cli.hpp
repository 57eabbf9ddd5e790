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

#include <atomic>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace taskbench::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kProviderExhausted = 3,
  kInterrupted = 130,
};

struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path profile;
  int budget = 2;
  int workers = 1;
  double timeout_s = 300.0;
  bool no_install = false;
  std::string format = "markdown";
  std::filesystem::path out = "out";
  unsigned seed = 0;
  bool dry_run = false;
  std::string runner = "process";
  bool timings = false;
  std::optional<std::filesystem::path> resume;

  // curate
  std::filesystem::path sources;
  std::optional<std::size_t> target_size;
  std::string policy = "benchmark";
  int candidates_per_source = 1;
  bool single_call = false;
  std::optional<std::filesystem::path> templates;

  // report
  std::vector<std::filesystem::path> runs;

  /// Throws ConfigError.
  void validate(const std::string& command) const;
};

/// Entry point shared by the binary and the tests. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const std::atomic<bool>* stop = nullptr);

/// Makes SIGINT/SIGTERM set the flag returned here.
const std::atomic<bool>* install_signal_handlers();

}  // namespace taskbench::cli
