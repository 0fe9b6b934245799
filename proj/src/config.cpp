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

#include "perfics/config.hpp"

#include <fstream>
#include <set>

#include "perfics/errors.hpp"

namespace perfics {

void RetryPolicy::validate() const {
  if (max_attempts < 1) throw InvariantViolation("max_attempts", "must be >= 1");
  if (base_backoff_ms < 0) {
    throw InvariantViolation("base_backoff_ms", "must be >= 0");
  }
  if (max_concurrent < 1) {
    throw InvariantViolation("max_concurrent", "must be >= 1");
  }
}

const ModelProfile* HarnessConfig::find_model(const std::string& name) const {
  for (const auto& m : models) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

namespace {

const ModelProfile& single_with_role(const std::vector<ModelProfile>& models,
                                     ModelRole role) {
  const ModelProfile* found = nullptr;
  for (const auto& m : models) {
    if (m.role != role) continue;
    if (found) {
      throw ConfigError("more than one model with role " +
                        std::string(to_string(role)));
    }
    found = &m;
  }
  if (!found) {
    throw ConfigError("no model with role " + std::string(to_string(role)));
  }
  return *found;
}

void check_keys(const nlohmann::json& obj, const std::set<std::string>& known,
                const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace

const ModelProfile& HarnessConfig::control() const {
  return single_with_role(models, ModelRole::kControl);
}

const ModelProfile& HarnessConfig::oracle() const {
  return single_with_role(models, ModelRole::kOracle);
}

std::vector<const ModelProfile*> HarnessConfig::candidates() const {
  std::vector<const ModelProfile*> out;
  for (const auto& m : models) {
    if (m.role == ModelRole::kCandidate) out.push_back(&m);
  }
  return out;
}

HarnessConfig parse_config(const nlohmann::json& doc) {
  check_keys(doc,
             {"prompts", "generation", "oracle_generation", "models",
              "endpoints", "prices", "retry", "benchmark"},
             "config");
  HarnessConfig cfg;
  try {
    if (doc.contains("prompts")) {
      const auto& p = doc.at("prompts");
      check_keys(p, {"zero", "critique", "refiner", "eval"}, "prompts");
      cfg.prompts.zero = p.value("zero", cfg.prompts.zero);
      cfg.prompts.critique = p.value("critique", cfg.prompts.critique);
      cfg.prompts.refiner = p.value("refiner", cfg.prompts.refiner);
      cfg.prompts.eval = p.value("eval", cfg.prompts.eval);
      cfg.prompts.validate();
    }
    if (doc.contains("generation")) {
      cfg.generation = doc.at("generation").get<GenerationParams>();
    }
    if (doc.contains("oracle_generation")) {
      cfg.oracle_generation = doc.at("oracle_generation").get<GenerationParams>();
    }
    if (doc.contains("models")) {
      std::set<std::string> names;
      for (const auto& m : doc.at("models")) {
        auto profile = m.get<ModelProfile>();
        validate_profile(profile);
        if (!names.insert(profile.name).second) {
          throw ConfigError("duplicate model '" + profile.name + "'");
        }
        if (m.contains("endpoint")) {
          cfg.model_endpoint[profile.name] = m.at("endpoint").get<std::string>();
        }
        cfg.models.push_back(std::move(profile));
      }
    }
    if (doc.contains("endpoints")) {
      for (const auto& [name, e] : doc.at("endpoints").items()) {
        check_keys(e,
                   {"base_url", "path", "api_key_env", "timeout_ms",
                    "send_extensions"},
                   "endpoints." + name);
        EndpointConfig ep;
        ep.base_url = e.at("base_url").get<std::string>();
        ep.path = e.value("path", ep.path);
        ep.api_key_env = e.value("api_key_env", ep.api_key_env);
        ep.timeout_ms = e.value("timeout_ms", ep.timeout_ms);
        ep.send_extensions = e.value("send_extensions", ep.send_extensions);
        cfg.endpoints.emplace(name, std::move(ep));
      }
    }
    if (doc.contains("prices")) {
      for (const auto& [model, p] : doc.at("prices").items()) {
        check_keys(p, {"prompt_per_1k", "completion_per_1k"}, "prices." + model);
        cfg.prices[model] = Price{p.value("prompt_per_1k", 0.0),
                                  p.value("completion_per_1k", 0.0)};
      }
    }
    if (doc.contains("retry")) {
      const auto& r = doc.at("retry");
      check_keys(r, {"max_attempts", "base_backoff_ms", "max_concurrent"},
                 "retry");
      cfg.retry.max_attempts = r.value("max_attempts", cfg.retry.max_attempts);
      cfg.retry.base_backoff_ms =
          r.value("base_backoff_ms", cfg.retry.base_backoff_ms);
      cfg.retry.max_concurrent =
          r.value("max_concurrent", cfg.retry.max_concurrent);
      cfg.retry.validate();
    }
    if (doc.contains("benchmark")) {
      cfg.benchmark = doc.at("benchmark").get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(e.what());
  }
  for (const auto& [model, endpoint] : cfg.model_endpoint) {
    if (!cfg.endpoints.contains(endpoint)) {
      throw ConfigError("model '" + model + "' references unknown endpoint '" +
                        endpoint + "'");
    }
  }
  return cfg;
}

HarnessConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

nlohmann::json config_to_json(const HarnessConfig& cfg) {
  nlohmann::json doc;
  doc["prompts"] = {{"zero", cfg.prompts.zero},
                    {"critique", cfg.prompts.critique},
                    {"refiner", cfg.prompts.refiner},
                    {"eval", cfg.prompts.eval}};
  doc["generation"] = cfg.generation;
  doc["oracle_generation"] = cfg.oracle_generation;
  doc["models"] = nlohmann::json::array();
  for (const auto& m : cfg.models) {
    nlohmann::json jm = m;
    if (auto it = cfg.model_endpoint.find(m.name); it != cfg.model_endpoint.end()) {
      jm["endpoint"] = it->second;
    }
    doc["models"].push_back(std::move(jm));
  }
  doc["endpoints"] = nlohmann::json::object();
  for (const auto& [name, ep] : cfg.endpoints) {
    doc["endpoints"][name] = {{"base_url", ep.base_url},
                              {"path", ep.path},
                              {"api_key_env", ep.api_key_env},
                              {"timeout_ms", ep.timeout_ms},
                              {"send_extensions", ep.send_extensions}};
  }
  doc["prices"] = nlohmann::json::object();
  for (const auto& [model, p] : cfg.prices) {
    doc["prices"][model] = {{"prompt_per_1k", p.prompt_per_1k},
                            {"completion_per_1k", p.completion_per_1k}};
  }
  doc["retry"] = {{"max_attempts", cfg.retry.max_attempts},
                  {"base_backoff_ms", cfg.retry.base_backoff_ms},
                  {"max_concurrent", cfg.retry.max_concurrent}};
  if (cfg.benchmark) doc["benchmark"] = *cfg.benchmark;
  return doc;
}

}  // namespace perfics
