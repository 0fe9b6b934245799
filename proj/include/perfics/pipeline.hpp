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

#ifndef PERFICS_PIPELINE_HPP_
#define PERFICS_PIPELINE_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "perfics/benchmark.hpp"
#include "perfics/config.hpp"
#include "perfics/gateway.hpp"
#include "perfics/perfics.hpp"
#include "perfics/run_store.hpp"
#include "perfics/scoring.hpp"

namespace perfics {

struct RunPlan {
  std::string control;
  std::string oracle;
  std::vector<std::string> candidates;
  std::vector<TaskPrompt> prompts;
  int iterations = 1;
};

RunPlan make_plan(const HarnessConfig& config, const Benchmark& bench,
                  int iterations);

// Control zero-shot answers, then each candidate's y0, c_k, y_{k+1}.
std::vector<WorkUnit> generation_units(const RunPlan& plan);
// candidates x {zero_shot, refined} x prompts x {model_first, control_first}.
std::vector<WorkUnit> judgment_units(const RunPlan& plan);
std::vector<WorkUnit> full_plan(const RunPlan& plan);

struct StageReport {
  int completed = 0;
  int skipped = 0;  // already in the log
  int failed = 0;
  std::vector<std::string> failures;
};

StageReport run_generation(RunStore& store, Gateway& gateway,
                           const HarnessConfig& config, const RunPlan& plan,
                           int workers = 1);

// Judges every pending judgment unit whose inputs exist in the log.
StageReport run_judging(RunStore& store, Gateway& gateway,
                        const HarnessConfig& config, const RunPlan& plan,
                        int workers = 1);

struct ModelReport {
  std::string model;
  ScoreRow zero_shot;
  ScoreRow refined;
  std::map<std::string, int> n_zero_shot;
  std::map<std::string, int> n_refined;
  std::vector<DomainDelta> deltas;
  std::optional<double> eq_zero_shot;
  std::optional<double> eq_refined;
  std::optional<double> weighted_zero_shot;
  std::optional<double> weighted_refined;
  std::optional<double> win_rate_zero_shot;
  std::optional<double> win_rate_refined;
  std::map<std::string, double> token_change_pct;
  std::vector<std::string> excluded;
};

std::vector<ModelReport> score_run(const std::vector<RunEvent>& events,
                                   const Benchmark& bench,
                                   const std::vector<std::string>& candidates,
                                   const WeightVector& weights,
                                   const GenerationParams& params);

CategoryPerformance to_performance(const ModelReport& report);

}  // namespace perfics

#endif  // PERFICS_PIPELINE_HPP_
