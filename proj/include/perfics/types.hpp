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

#ifndef PERFICS_TYPES_HPP_
#define PERFICS_TYPES_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace perfics {

// Category labels are compared case-insensitively. Stored form is lowercase
// with runs of spaces/underscores folded to '-', so "Common Sense" and
// "common-sense" name the same category.
std::string normalize_category(std::string_view name);

struct TaskCategory {
  std::string name;
  int prompt_count = 0;

  bool operator==(const TaskCategory&) const = default;
};

// The nine categories of the 80-prompt Vicuna question set, in table order.
const std::vector<TaskCategory>& vicuna_categories();

struct TaskPrompt {
  std::string id;
  std::string category;
  std::string text;
  int index_in_category = 0;

  bool operator==(const TaskPrompt&) const = default;
};

// Static instructions for the zero-shot, critique, refine and evaluation
// phases. Defaults reproduce the published instruction texts.
struct PromptSet {
  std::string zero;
  std::string critique;
  std::string refiner;
  std::string eval;

  static PromptSet defaults();
  void validate() const;

  bool operator==(const PromptSet&) const = default;
};

struct GenerationParams {
  int max_tokens = 1024;
  double temperature = 0.7;
  double top_p = 0.1;
  int top_k = 40;
  double typical_p = 1.0;
  double repetition_penalty = 1.18;
  int min_length = 0;
  int num_beams = 1;
  bool early_stopping = false;
  int truncation_length = 2048;
  std::int64_t seed = -1;
  bool add_bos_token = true;
  bool skip_special_tokens = true;

  // Oracle calls are pinned to temperature 0 so fixtures stay deterministic.
  static GenerationParams oracle_defaults();
  void validate() const;

  bool operator==(const GenerationParams&) const = default;
};

// Throws ConfigError on unknown keys or wrong types; missing keys keep their
// defaults.
void to_json(nlohmann::json& j, const GenerationParams& p);
void from_json(const nlohmann::json& j, GenerationParams& p);

enum class ModelRole { kCandidate, kControl, kOracle };
std::string_view to_string(ModelRole role);
ModelRole parse_model_role(std::string_view text);

struct ModelProfile {
  std::string name;
  double vram_16bit_gb = 0.0;
  double vram_4bit_gb = 0.0;
  // Keys: arc, hellaswag, mmlu, truthfulqa, average (lowercase).
  std::map<std::string, double> external_scores;
  ModelRole role = ModelRole::kCandidate;

  std::optional<double> external_average() const;
  // VRAM footprint in GB at 4- or 16-bit quantization.
  double vram_gb(int quant_bits) const;

  bool operator==(const ModelProfile&) const = default;
};

// Which candidate output a judgment or score refers to.
enum class Variant { kZeroShot, kRefined };
std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

// Presentation order of a pairwise judgment.
enum class Ordering { kModelFirst, kControlFirst };
std::string_view to_string(Ordering o);
Ordering parse_ordering(std::string_view text);

// Returns `p` unchanged when every invariant holds; throws InvariantViolation
// naming the offending field otherwise.
const ModelProfile& validate_profile(const ModelProfile& p);

void to_json(nlohmann::json& j, const ModelProfile& p);
void from_json(const nlohmann::json& j, ModelProfile& p);

}  // namespace perfics

#endif  // PERFICS_TYPES_HPP_
