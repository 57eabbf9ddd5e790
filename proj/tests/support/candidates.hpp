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

// Tiny candidate files with a chosen verdict per test case, for exercising
// the curation stages against the real sandbox.

#include <fmt/format.h>

#include <filesystem>
#include <string>

namespace taskbench::fixtures {

// One letter per case: P passes, F fails, X passes only on the first run
// (flag file under `flag_dir`).
inline std::string candidate_solution() {
  return "import subprocess\n"
         "requirements = []\n"
         "for package in requirements:\n"
         "    subprocess.run(['pip', 'install', '-U', package])\n"
         "\n"
         "import os\n"
         "\n"
         "def echo_value(x):\n"
         "    \"\"\"\n"
         "    Return the argument unchanged.\n"
         "\n"
         "    Args:\n"
         "        x: any value.\n"
         "\n"
         "    Returns:\n"
         "        The same value.\n"
         "    \"\"\"\n"
         "    return x\n";
}

inline std::string candidate_tests(const std::string& profile, const std::filesystem::path& flag) {
  std::string out = "def test_echo_value():\n    print(\"Testing started.\")\n";
  int n = static_cast<int>(profile.size());
  for (int i = 1; i <= n; ++i) {
    std::string cond;
    switch (profile[i - 1]) {
      case 'P': cond = fmt::format("echo_value({}) == {}", i, i); break;
      case 'F': cond = fmt::format("echo_value({}) == {}", i, i + 100); break;
      default:
        cond = fmt::format("not os.path.exists('{0}') and open('{0}', 'w').close() is None",
                           flag.string() + "." + std::to_string(i));
    }
    out += fmt::format(
        "\n    # Test case {0}\n"
        "    print(\"Testing case [{0}/{1}] started.\")\n"
        "    try:\n"
        "        assert {2}, f\"Test case [{0}/{1}] failed: case {0}\"\n"
        "        print(f\"Test case [{0}/{1}] succeeded: case {0}\")\n"
        "    except Exception as e:\n"
        "        print(f\"Test case [{0}/{1}] failed: case {0}\\nerror:\", e)\n",
        i, n, cond);
  }
  out += "    print(\"Testing finished.\")\n\n# Run the test function\ntest_echo_value()\n";
  return out;
}

inline std::string candidate_file(const std::string& profile, const std::filesystem::path& flag) {
  return candidate_solution() + "\n\n" + candidate_tests(profile, flag);
}

}  // namespace taskbench::fixtures
