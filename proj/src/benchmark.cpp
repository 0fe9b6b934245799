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

#include "perfics/benchmark.hpp"

#include <fstream>
#include <unordered_set>

#include "perfics/errors.hpp"

namespace perfics {

const TaskPrompt* Benchmark::find(std::string_view id) const {
  for (const auto& p : prompts) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

std::map<std::string, std::string> Benchmark::category_by_prompt() const {
  std::map<std::string, std::string> out;
  for (const auto& p : prompts) out.emplace(p.id, p.category);
  return out;
}

std::vector<std::string> Benchmark::category_names() const {
  std::vector<std::string> out;
  out.reserve(categories.size());
  for (const auto& c : categories) out.push_back(c.name);
  return out;
}

namespace {

std::string read_id(const nlohmann::json& value, std::size_t line_no) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) return std::to_string(value.get<long long>());
  throw ParseError(line_no, "field 'id' must be a string or integer");
}

std::string read_string(const nlohmann::json& record, const char* key,
                        std::size_t line_no) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    throw ParseError(line_no,
                     std::string("field '") + key + "' missing or not a string");
  }
  return it->get<std::string>();
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

Benchmark parse_benchmark(std::istream& in) {
  Benchmark bench;
  std::unordered_set<std::string> seen;
  std::map<std::string, std::size_t> category_slot;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    if (!record.is_object()) throw ParseError(line_no, "record is not an object");
    auto id_it = record.find("id");
    if (id_it == record.end()) throw ParseError(line_no, "field 'id' missing");

    TaskPrompt prompt;
    prompt.id = read_id(*id_it, line_no);
    prompt.category = normalize_category(read_string(record, "category", line_no));
    prompt.text = read_string(record, "text", line_no);
    if (prompt.id.empty()) throw ParseError(line_no, "empty id");
    if (prompt.category.empty()) throw ParseError(line_no, "empty category");
    if (prompt.text.empty()) throw ParseError(line_no, "empty text");
    if (!seen.insert(prompt.id).second) {
      throw DuplicateIdError("duplicate prompt id '" + prompt.id + "' on line " +
                             std::to_string(line_no));
    }

    auto [slot, inserted] =
        category_slot.emplace(prompt.category, bench.categories.size());
    if (inserted) bench.categories.push_back({prompt.category, 0});
    TaskCategory& cat = bench.categories[slot->second];
    prompt.index_in_category = cat.prompt_count++;
    bench.prompts.push_back(std::move(prompt));
  }
  return bench;
}

Benchmark load_benchmark(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open benchmark file " + path.string());
  return parse_benchmark(in);
}

}  // namespace perfics
