// Copyright 2026 The PeRFICS Harness Authors.
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

#ifndef PERFICS_BENCHMARK_HPP_
#define PERFICS_BENCHMARK_HPP_

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "perfics/types.hpp"

namespace perfics {

// A loaded question set. Categories are listed in order of first appearance
// with the number of prompts seen for each.
struct Benchmark {
  std::vector<TaskPrompt> prompts;
  std::vector<TaskCategory> categories;

  const TaskPrompt* find(std::string_view id) const;
  std::map<std::string, std::string> category_by_prompt() const;
  std::vector<std::string> category_names() const;
};

// Reads one JSON record per line: {"id": ..., "category": ..., "text": ...}.
// Blank lines are skipped. Integer ids are accepted and stored as strings.
Benchmark parse_benchmark(std::istream& in);
Benchmark load_benchmark(const std::filesystem::path& path);

}  // namespace perfics

#endif  // PERFICS_BENCHMARK_HPP_
