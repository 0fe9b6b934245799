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

#ifndef PERFICS_PERFICS_HPP_
#define PERFICS_PERFICS_HPP_

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "perfics/scoring.hpp"
#include "perfics/types.hpp"

namespace perfics {

struct PerficsParams {
  double alpha = 0.5;
  double beta = 1.0;
  double rho = 0.5;
  double eta = 1.0;
  double kappa = 0.5;
  double gamma = 0.05;
  double delta = 1e-5;

  void validate() const;
  bool operator==(const PerficsParams&) const = default;
};

// Missing keys keep their defaults; unknown keys are rejected.
PerficsParams perfics_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PerficsParams& p);
// "default" or a JSON file path.
PerficsParams resolve_perfics_params(const std::string& spec);

struct PerficsInput {
  std::string model;
  double baseline = 0.0;  // B, percent of control
  double refined = 0.0;   // R, percent of control
  double external = 0.0;  // E
  double cost = 0.0;      // C, GB

  // Percentage points.
  double improvement() const { return refined - baseline; }
};

struct PerficsResult {
  std::string model;
  double log_score = 0.0;
  // Empty when exp(log_score) overflows a double.
  std::optional<double> score;
  int rank = 0;
  double cost = 0.0;
};

double perfics_log_score(const PerficsInput& in, const PerficsParams& p);

// Straight evaluation of the ratio. May return inf or nan.
double perfics_direct(const PerficsInput& in, const PerficsParams& p);

std::vector<PerficsResult> rank_models(const std::vector<PerficsInput>& inputs,
                                       const PerficsParams& p);

// Zero-shot and refined category means (percent) for one model.
struct CategoryPerformance {
  std::string model;
  std::map<std::string, double> zero_shot;
  std::map<std::string, double> refined;
};

struct ScenarioConstraints {
  std::optional<double> vram_budget_gb;
  int quant_bits = 4;
  std::variant<std::string, WeightVector> focus = std::string("writing");
  std::optional<double> gamma_override;
};

// Filters by VRAM at the chosen quantization, rebuilds B and I from the
// focus category (or weighted mix), takes E and C from the profiles.
std::vector<PerficsResult> scenario_rank(
    const std::vector<CategoryPerformance>& performance,
    const std::vector<ModelProfile>& profiles,
    const ScenarioConstraints& constraints, const PerficsParams& p);

}  // namespace perfics

#endif  // PERFICS_PERFICS_HPP_
