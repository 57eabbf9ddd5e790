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

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "taskbench/error.hpp"

namespace taskbench::process {

enum class Stream { Out, Err };

struct Spec {
  std::vector<std::string> argv;
  std::filesystem::path cwd;
  /// Added to (or overriding) the inherited environment.
  std::map<std::string, std::string> env;
  std::string stdin_data;
  std::chrono::milliseconds timeout{std::chrono::seconds(300)};
  /// Bytes forwarded across both streams before output is cut off.
  std::size_t max_output_bytes = 10u << 20;
  /// Try to place the child in a fresh network namespace.
  bool isolate_network = false;
};

struct Result {
  /// Exit status, 128+signal for signalled children, -1 on timeout.
  int exit_code = 0;
  bool timed_out = false;
  bool truncated = false;
  double duration_s = 0.0;
};

/// Called once per output line, terminator stripped, in arrival order within
/// each stream.
using LineSink = std::function<void(Stream, std::string_view)>;

class SpawnError : public Error {
 public:
  using Error::Error;
};

/// Runs `spec.argv` in its own process group, streaming lines to `sink`.
/// On timeout the whole group is killed. Throws SpawnError when the program
/// cannot be started.
Result run(const Spec& spec, const LineSink& sink);

}  // namespace taskbench::process
