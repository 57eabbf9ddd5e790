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

#include "taskbench/curation.hpp"
#include "taskbench/fileio.hpp"
#include "taskbench/text.hpp"

namespace taskbench::curation {

namespace {

// Source context ahead of the numbered task prompt. The slot names are the
// only ones the renderer resolves; any other braces pass through.
constexpr std::string_view kTaskPrompt =
    R"(Domain: {domain}
Model: {model_name}
Model description: {description}
Example code:
{example_code}
Performance metrics: {metrics}

1. Please design a requirement that can be described in one sentence.
2. Based on the above description, generate code to implement the
requirement.
3. Function comments should follow the Google Python Style Guide,
including args, returns, and raises.
4. Write corresponding test functions based on the generated code.
5. The test cases should be three examples of different difficulty
levels, e.g., the first one verifies that the function executes
normally, the second verifies that incorrect inputs are handled
properly, and thethird verifies that the function returns the correct value.
6. For testing purposes, read image and audio files, download
them from online resources to the local machine, or obtain them
from datasets; do not provide fake or non-existent file addresses.
)";

constexpr std::string_view kImportExample =
    R"(import subprocess
requirements = ["package1", "package2"]
for package in requirements:
    subprocess.run(['pip', 'install', '-U', package])
)";

constexpr std::string_view kTestPrompt =
    R"(1. The function starts by printing "Testing started."
2. For images or audio,  load a dataset or download data from online resources.
3. The test case starts by printing "Testing case [x/x] started",
prints "succeeded" on success, and "failed" on failure.
4. The function ends by printing "Testing finished."
)";

constexpr std::string_view kTestExample =
    R"(def test_...():
    print("Test started.")
    dataset = load_dataset("...")
    sample_data = dataset[0]  # Extract a sample from the dataset

    # Test case 1:...
    print("Test case [1/3] started.")
    try:
        assert assert 1, f"Test case [1/3] failed: ..."
        print(f"Test case [1/3] succeeded: ...")
    except Exception as e::
        print(f"Test case [1/3] failed: ...\nerror:", e)

    # Test case 2:...

    # Test case 3:...

# Run the test function
test_...()
)";

std::string_view part_label(TemplateName n) {
  switch (n) {
    case TemplateName::TaskPrompt: return "Task prompt";
    case TemplateName::ImportExample: return "Import example";
    case TemplateName::TestPrompt: return "Test prompt";
    case TemplateName::TestExample: return "Test example";
  }
  return "";
}

std::string render_metrics(const std::map<std::string, std::string>& m) {
  std::vector<std::string> parts;
  for (const auto& [k, v] : m) parts.push_back(fmt::format("{}: {}", k, v));
  return text::join(parts, ", ");
}

}  // namespace

std::string_view template_file_stem(TemplateName n) {
  switch (n) {
    case TemplateName::TaskPrompt: return "task_prompt";
    case TemplateName::ImportExample: return "import_example";
    case TemplateName::TestPrompt: return "test_prompt";
    case TemplateName::TestExample: return "test_example";
  }
  return "";
}

Templates Templates::defaults() {
  return {{{{TemplateName::TaskPrompt, std::string(kTaskPrompt)},
            {TemplateName::ImportExample, std::string(kImportExample)},
            {TemplateName::TestPrompt, std::string(kTestPrompt)},
            {TemplateName::TestExample, std::string(kTestExample)}}}};
}

Templates Templates::load(const std::filesystem::path& dir) {
  auto t = defaults();
  for (auto& part : t.parts) {
    auto file = dir / fmt::format("{}.txt", template_file_stem(part.name));
    if (std::filesystem::exists(file)) part.body = read_file(file);
  }
  return t;
}

std::string render_generation_prompt(const task::SourceMeta& source, const Templates& templates) {
  auto required = [](std::string_view name, const std::string& value) {
    if (text::is_blank(value)) {
      throw CurationError(CurationErrorKind::UnresolvedSlot, std::string(name),
                          fmt::format("unresolved template slot {{{}}}", name));
    }
    return std::string(text::trim(value));
  };
  auto optional = [](const std::string& value) {
    return text::is_blank(value) ? std::string("(none)") : std::string(text::trim(value));
  };
  const std::vector<std::pair<std::string, std::string>> slots = {
      {"{domain}", required("domain", source.domain)},
      {"{model_name}", required("model_name", source.model_name)},
      {"{description}", required("description", source.model_description)},
      {"{example_code}", optional(source.example_code)},
      {"{metrics}", optional(render_metrics(source.performance_metrics))},
  };

  std::string out;
  for (const auto& part : templates.parts) {
    std::string body = part.body;
    for (const auto& [slot, value] : slots) body = text::replace_all(body, slot, value);
    if (!out.empty()) out += '\n';
    out += fmt::format("{}:\n{}", part_label(part.name), body);
    if (out.back() != '\n') out += '\n';
  }
  return out;
}

std::optional<task::Category> map_domain(std::string_view domain) {
  using task::Category;
  // Ordered: the first prefix that matches on a word boundary wins.
  static const std::vector<std::pair<std::string_view, Category>> kTable = {
      {"natural language processing", Category::NLP},
      {"nlp", Category::NLP},
      {"computer vision", Category::ComputerVision},
      {"tabular", Category::TabularData},
      {"audio", Category::AudioSpeech},
      {"speech", Category::AudioSpeech},
      {"multimodal", Category::Multimodal},
      {"reinforcement learning", Category::ReinforcementLearning},
      {"robotics", Category::ReinforcementLearning},
      {"classification", Category::Classification},
  };
  std::string d = text::collapse_whitespace(text::trim(domain));
  for (auto c : task::kCategories) {
    if (d == task::category_label(c)) return c;
  }
  std::transform(d.begin(), d.end(), d.begin(), [](unsigned char ch) { return std::tolower(ch); });
  for (const auto& [prefix, cat] : kTable) {
    if (!d.starts_with(prefix)) continue;
    if (d.size() == prefix.size() || d[prefix.size()] == ' ' || d[prefix.size()] == '-') return cat;
  }
  return std::nullopt;
}

}  // namespace taskbench::curation
