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

#include "perfics/perfics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "perfics/errors.hpp"

namespace perfics {

namespace {

double logaddexp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

void require_finite(double v, const char* field) {
  if (!std::isfinite(v)) {
    throw NonFiniteInput(std::string(field) + " is not finite");
  }
}

void require_nonneg(double v, const char* field) {
  if (v < 0.0) throw InvariantViolation(field, std::string(field) + " must be >= 0");
}

}  // namespace

void PerficsParams::validate() const {
  const std::pair<const char*, double> all[] = {
      {"alpha", alpha}, {"beta", beta},   {"rho", rho},     {"eta", eta},
      {"kappa", kappa}, {"gamma", gamma}, {"delta", delta}};
  for (const auto& [name, v] : all) require_finite(v, name);
  if (!(eta > 0.0)) throw InvariantViolation("eta", "eta must be > 0");
  if (!(kappa > 0.0)) throw InvariantViolation("kappa", "kappa must be > 0");
  require_nonneg(alpha, "alpha");
  require_nonneg(beta, "beta");
  require_nonneg(rho, "rho");
  require_nonneg(gamma, "gamma");
  require_nonneg(delta, "delta");
}

PerficsParams perfics_params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("PeRFICS parameters must be an object");
  PerficsParams p;
  const std::map<std::string, double*> slots = {
      {"alpha", &p.alpha}, {"beta", &p.beta},   {"rho", &p.rho},
      {"eta", &p.eta},     {"kappa", &p.kappa}, {"gamma", &p.gamma},
      {"delta", &p.delta}};
  for (const auto& [k, v] : j.items()) {
    auto it = slots.find(k);
    if (it == slots.end()) throw ConfigError("unknown PeRFICS parameter '" + k + "'");
    if (!v.is_number()) throw ConfigError("PeRFICS parameter '" + k + "' is not a number");
    *it->second = v.get<double>();
  }
  p.validate();
  return p;
}

nlohmann::json to_json(const PerficsParams& p) {
  return {{"alpha", p.alpha}, {"beta", p.beta},   {"rho", p.rho},
          {"eta", p.eta},     {"kappa", p.kappa}, {"gamma", p.gamma},
          {"delta", p.delta}};
}

PerficsParams resolve_perfics_params(const std::string& spec) {
  if (spec == "default") return PerficsParams{};
  std::ifstream in(spec);
  if (!in) throw ConfigError("cannot open parameter file '" + spec + "'");
  try {
    return perfics_params_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("parameter file '" + spec + "': " + e.what());
  }
}

double perfics_log_score(const PerficsInput& in, const PerficsParams& p) {
  p.validate();
  require_finite(in.baseline, "baseline");
  require_finite(in.refined, "refined");
  require_finite(in.external, "external");
  require_finite(in.cost, "cost");
  require_nonneg(in.cost, "cost");
  const double re = p.rho * in.external;
  if (re < 0.0) throw InvariantViolation("external", "rho * E must be >= 0");

  const double a = p.alpha * in.baseline + p.beta * in.improvement();
  const double log_num =
      logaddexp(std::log(p.eta) + p.kappa * a,
                re > 0.0 ? std::log(re) : -std::numeric_limits<double>::infinity());
  const double log_den =
      logaddexp(p.gamma * in.cost, p.delta > 0.0
                                       ? std::log(p.delta)
                                       : -std::numeric_limits<double>::infinity());
  const double out = log_num - log_den;
  require_finite(out, "log score");
  return out;
}

double perfics_direct(const PerficsInput& in, const PerficsParams& p) {
  const double a = p.alpha * in.baseline + p.beta * in.improvement();
  return (p.eta * std::exp(p.kappa * a) + p.rho * in.external) /
         (std::exp(p.gamma * in.cost) + p.delta);
}

std::vector<PerficsResult> rank_models(const std::vector<PerficsInput>& inputs,
                                       const PerficsParams& p) {
  if (inputs.empty()) throw InvariantViolation("inputs", "nothing to rank");
  std::set<std::string> names;
  std::vector<PerficsResult> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) {
    if (!names.insert(in.model).second) {
      throw DuplicateModel("model '" + in.model + "' listed twice");
    }
    PerficsResult r;
    r.model = in.model;
    r.log_score = perfics_log_score(in, p);
    r.cost = in.cost;
    if (r.log_score < std::log(std::numeric_limits<double>::max())) {
      r.score = std::exp(r.log_score);
    }
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const PerficsResult& a, const PerficsResult& b) {
    if (a.log_score != b.log_score) return a.log_score > b.log_score;
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.model < b.model;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i) + 1;
  return out;
}

namespace {

double focus_value(const std::map<std::string, double>& means,
                   const ScenarioConstraints& c, const std::string& model) {
  if (const auto* cat = std::get_if<std::string>(&c.focus)) {
    auto it = means.find(normalize_category(*cat));
    if (it == means.end()) {
      throw CategoryMismatch("model '" + model + "' has no score for '" + *cat + "'");
    }
    return it->second;
  }
  const auto& w = std::get<WeightVector>(c.focus);
  ScoreRow row;
  for (const auto& [cat, weight] : w.weights()) {
    if (weight <= 0.0) continue;
    auto it = means.find(cat);
    if (it == means.end()) {
      throw CategoryMismatch("model '" + model + "' has no score for '" + cat + "'");
    }
    row.emplace_back(cat, it->second);
  }
  return weighted_mean(row, w);
}

}  // namespace

std::vector<PerficsResult> scenario_rank(
    const std::vector<CategoryPerformance>& performance,
    const std::vector<ModelProfile>& profiles,
    const ScenarioConstraints& constraints, const PerficsParams& p) {
  if (constraints.quant_bits != 4 && constraints.quant_bits != 16) {
    throw ConfigError("quantization must be 4 or 16 bits");
  }
  PerficsParams params = p;
  if (constraints.gamma_override) params.gamma = *constraints.gamma_override;

  std::vector<PerficsInput> feasible;
  for (const auto& perf : performance) {
    auto prof = std::find_if(profiles.begin(), profiles.end(),
                             [&](const ModelProfile& m) { return m.name == perf.model; });
    if (prof == profiles.end()) {
      throw ConfigError("no profile for model '" + perf.model + "'");
    }
    const double vram = prof->vram_gb(constraints.quant_bits);
    if (constraints.vram_budget_gb && vram > *constraints.vram_budget_gb) continue;
    const auto e = prof->external_average();
    if (!e) throw ConfigError("profile '" + perf.model + "' lacks an external average");
    PerficsInput in;
    in.model = perf.model;
    in.baseline = focus_value(perf.zero_shot, constraints, perf.model);
    in.refined = focus_value(perf.refined, constraints, perf.model);
    in.external = *e;
    in.cost = vram;
    feasible.push_back(std::move(in));
  }
  if (feasible.empty()) throw NoFeasibleModel("no model fits the VRAM budget");
  return rank_models(feasible, params);
}

}  // namespace perfics
