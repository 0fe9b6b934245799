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

#include "perfics/types.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <set>

#include "perfics/errors.hpp"

namespace perfics {

std::string normalize_category(std::string_view name) {
  std::string out;
  bool pending_sep = false;
  for (char ch : name) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || c == '_' || c == '-') {
      pending_sep = !out.empty();
      continue;
    }
    if (pending_sep) out.push_back('-');
    pending_sep = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

const std::vector<TaskCategory>& vicuna_categories() {
  static const std::vector<TaskCategory> kCategories = {
      {"writing", 10},        {"roleplay", 10}, {"common-sense", 10},
      {"fermi", 10},          {"counterfactual", 10},
      {"coding", 7},          {"math", 3},      {"generic", 10},
      {"knowledge", 10},
  };
  return kCategories;
}

PromptSet PromptSet::defaults() {
  PromptSet p;
  p.zero =
      "You are tasked with improving the quality of a response to a "
      "question. The question and responses are provided below. Question:";
  p.critique =
      "Reflect on the response. Analyze the correctness of the information "
      "provided, the coherence and clarity of the explanation, the depth of "
      "the answer given the complexity of the question, and the relevance of "
      "your response to the specific context of the question. Provide only "
      "your critique.";
  p.refiner =
      "Based on your initial response and the subsequent self-critique, "
      "consider ways in which the response could be improved. Now, provide an "
      "enhanced and refined response to the initial question. Give me just "
      "the enhanced response.";
  p.eval =
      "We would like to request your feedback on the performance of two AI "
      "assistants in response to the user question displayed above. Please "
      "rate the helpfulness, relevance, accuracy, level of details of their "
      "responses. Each assistant receives an overall score on a scale of 1 to "
      "10, where a higher score indicates better overall performance. Please "
      "first output a single line containing only two values indicating the "
      "scores for Assistant 1 and 2, respectively. The two scores are "
      "separated by a space. In the subsequent line, please provide a "
      "comprehensive explanation of your evaluation, avoiding any potential "
      "bias and ensuring that the order in which the responses were presented "
      "does not affect your judgment.";
  return p;
}

void PromptSet::validate() const {
  if (zero.empty()) throw InvariantViolation("zero", "instruction is empty");
  if (critique.empty()) {
    throw InvariantViolation("critique", "instruction is empty");
  }
  if (refiner.empty()) {
    throw InvariantViolation("refiner", "instruction is empty");
  }
  if (eval.empty()) throw InvariantViolation("eval", "instruction is empty");
}

GenerationParams GenerationParams::oracle_defaults() {
  GenerationParams p;
  p.temperature = 0.0;
  return p;
}

void GenerationParams::validate() const {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw InvariantViolation("temperature", "must be a finite value >= 0");
  }
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    throw InvariantViolation("top_p", "must lie in (0, 1]");
  }
  if (max_tokens < 1) throw InvariantViolation("max_tokens", "must be >= 1");
}

namespace {

template <typename T>
void read_field(const nlohmann::json& j, const std::string& key, T& out) {
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("generation." + key + ": " + e.what());
  }
}

}  // namespace

void to_json(nlohmann::json& j, const GenerationParams& p) {
  j = nlohmann::json{
      {"max_tokens", p.max_tokens},
      {"temperature", p.temperature},
      {"top_p", p.top_p},
      {"top_k", p.top_k},
      {"typical_p", p.typical_p},
      {"repetition_penalty", p.repetition_penalty},
      {"min_length", p.min_length},
      {"num_beams", p.num_beams},
      {"early_stopping", p.early_stopping},
      {"truncation_length", p.truncation_length},
      {"seed", p.seed},
      {"add_bos_token", p.add_bos_token},
      {"skip_special_tokens", p.skip_special_tokens},
  };
}

void from_json(const nlohmann::json& j, GenerationParams& p) {
  if (!j.is_object()) throw ConfigError("generation: expected an object");
  GenerationParams out;
  for (const auto& [key, value] : j.items()) {
    if (key == "max_tokens") read_field(j, key, out.max_tokens);
    else if (key == "temperature") read_field(j, key, out.temperature);
    else if (key == "top_p") read_field(j, key, out.top_p);
    else if (key == "top_k") read_field(j, key, out.top_k);
    else if (key == "typical_p") read_field(j, key, out.typical_p);
    else if (key == "repetition_penalty") read_field(j, key, out.repetition_penalty);
    else if (key == "min_length") read_field(j, key, out.min_length);
    else if (key == "num_beams") read_field(j, key, out.num_beams);
    else if (key == "early_stopping") read_field(j, key, out.early_stopping);
    else if (key == "truncation_length") read_field(j, key, out.truncation_length);
    else if (key == "seed") read_field(j, key, out.seed);
    else if (key == "add_bos_token") read_field(j, key, out.add_bos_token);
    else if (key == "skip_special_tokens") read_field(j, key, out.skip_special_tokens);
    else throw ConfigError("generation: unknown key '" + key + "'");
  }
  out.validate();
  p = out;
}

std::string_view to_string(ModelRole role) {
  switch (role) {
    case ModelRole::kCandidate: return "candidate";
    case ModelRole::kControl: return "control";
    case ModelRole::kOracle: return "oracle";
  }
  return "candidate";
}

ModelRole parse_model_role(std::string_view text) {
  if (text == "candidate") return ModelRole::kCandidate;
  if (text == "control") return ModelRole::kControl;
  if (text == "oracle") return ModelRole::kOracle;
  throw ConfigError("unknown model role '" + std::string(text) + "'");
}

std::string_view to_string(Variant v) {
  return v == Variant::kZeroShot ? "zero_shot" : "refined";
}

Variant parse_variant(std::string_view text) {
  if (text == "zero_shot") return Variant::kZeroShot;
  if (text == "refined") return Variant::kRefined;
  throw ConfigError("unknown variant '" + std::string(text) + "'");
}

std::string_view to_string(Ordering o) {
  return o == Ordering::kModelFirst ? "model_first" : "control_first";
}

Ordering parse_ordering(std::string_view text) {
  if (text == "model_first") return Ordering::kModelFirst;
  if (text == "control_first") return Ordering::kControlFirst;
  throw ConfigError("unknown ordering '" + std::string(text) + "'");
}

std::optional<double> ModelProfile::external_average() const {
  if (auto it = external_scores.find("average"); it != external_scores.end()) {
    return it->second;
  }
  return std::nullopt;
}

double ModelProfile::vram_gb(int quant_bits) const {
  if (quant_bits == 4) return vram_4bit_gb;
  if (quant_bits == 16) return vram_16bit_gb;
  throw InvariantViolation("quantization", "must be 4 or 16 bit");
}

const ModelProfile& validate_profile(const ModelProfile& p) {
  if (p.name.empty()) throw InvariantViolation("name", "must be nonempty");
  if (!(p.vram_16bit_gb >= 0.0)) {
    throw InvariantViolation("vram_16bit_gb", "must be >= 0");
  }
  if (!(p.vram_4bit_gb >= 0.0)) {
    throw InvariantViolation("vram_4bit_gb", "must be >= 0");
  }
  if (p.vram_4bit_gb > p.vram_16bit_gb) {
    throw InvariantViolation("vram_4bit_gb", "exceeds vram_16bit_gb");
  }
  static constexpr std::array<const char*, 4> kComponents = {
      "arc", "hellaswag", "mmlu", "truthfulqa"};
  const auto avg = p.external_average();
  if (!avg) return p;
  double sum = 0.0;
  for (const char* name : kComponents) {
    auto it = p.external_scores.find(name);
    if (it == p.external_scores.end()) return p;
    sum += it->second;
  }
  const double mean = sum / kComponents.size();
  // Published averages carry one decimal; allow for that rounding.
  if (std::abs(*avg - mean) > 0.1 + 1e-9) {
    throw InvariantViolation(
        "external_scores.average",
        "differs from component mean " + std::to_string(mean) + " by > 0.1");
  }
  return p;
}

void to_json(nlohmann::json& j, const ModelProfile& p) {
  j = nlohmann::json{{"name", p.name},
                     {"role", std::string(to_string(p.role))},
                     {"vram_16bit_gb", p.vram_16bit_gb},
                     {"vram_4bit_gb", p.vram_4bit_gb},
                     {"external_scores", p.external_scores}};
}

void from_json(const nlohmann::json& j, ModelProfile& p) {
  static const std::set<std::string> kKnown = {
      "name", "role", "vram_16bit_gb", "vram_4bit_gb", "external_scores",
      "endpoint"};
  try {
    for (const auto& [key, value] : j.items()) {
      if (!kKnown.contains(key)) {
        throw ConfigError("model profile: unknown key '" + key + "'");
      }
    }
    ModelProfile out;
    out.name = j.at("name").get<std::string>();
    out.role = parse_model_role(j.value("role", std::string("candidate")));
    out.vram_16bit_gb = j.value("vram_16bit_gb", 0.0);
    out.vram_4bit_gb = j.value("vram_4bit_gb", 0.0);
    if (j.contains("external_scores")) {
      for (const auto& [key, value] : j.at("external_scores").items()) {
        std::string lowered;
        for (char c : key) {
          lowered.push_back(static_cast<char>(
              std::tolower(static_cast<unsigned char>(c))));
        }
        out.external_scores[lowered] = value.get<double>();
      }
    }
    p = std::move(out);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model profile: ") + e.what());
  }
}

}  // namespace perfics
