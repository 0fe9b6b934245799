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

#ifndef PERFICS_CONFIG_HPP_
#define PERFICS_CONFIG_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "perfics/types.hpp"

namespace perfics {

struct RetryPolicy {
  int max_attempts = 4;
  int base_backoff_ms = 500;
  int max_concurrent = 4;

  void validate() const;
  bool operator==(const RetryPolicy&) const = default;
};

// One chat-completion endpoint. The API key, if any, is read from the
// environment variable named by `api_key_env` at call time.
struct EndpointConfig {
  std::string base_url;
  std::string path = "/v1/chat/completions";
  std::string api_key_env;
  int timeout_ms = 120000;
  bool send_extensions = true;

  bool operator==(const EndpointConfig&) const = default;
};

// USD per 1000 tokens.
struct Price {
  double prompt_per_1k = 0.0;
  double completion_per_1k = 0.0;

  bool operator==(const Price&) const = default;
};

struct HarnessConfig {
  PromptSet prompts = PromptSet::defaults();
  GenerationParams generation;
  GenerationParams oracle_generation = GenerationParams::oracle_defaults();
  std::vector<ModelProfile> models;
  std::map<std::string, std::string> model_endpoint;
  std::map<std::string, EndpointConfig> endpoints;
  std::map<std::string, Price> prices;
  RetryPolicy retry;
  std::optional<std::string> benchmark;

  const ModelProfile* find_model(const std::string& name) const;
  // Throw ConfigError unless exactly one model carries the role.
  const ModelProfile& control() const;
  const ModelProfile& oracle() const;
  std::vector<const ModelProfile*> candidates() const;

  bool operator==(const HarnessConfig&) const = default;
};

HarnessConfig parse_config(const nlohmann::json& doc);
HarnessConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const HarnessConfig& config);

}  // namespace perfics

#endif  // PERFICS_CONFIG_HPP_
