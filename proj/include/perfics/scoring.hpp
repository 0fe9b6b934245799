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

#ifndef PERFICS_SCORING_HPP_
#define PERFICS_SCORING_HPP_

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "perfics/benchmark.hpp"
#include "perfics/judge.hpp"
#include "perfics/run_store.hpp"
#include "perfics/transcript.hpp"
#include "perfics/types.hpp"

namespace perfics {

struct CategoryScore {
  std::string category;
  Variant variant = Variant::kZeroShot;
  double mean_relative_pct = 0.0;
  int n = 0;
};

// 100 x mean of the given relative scores.
CategoryScore category_relative_mean(const std::vector<double>& s_r,
                                     std::string category, Variant variant);

// Picks the scores whose prompt belongs to `category` in `bench`.
CategoryScore category_relative_mean(const std::vector<DebiasedScore>& scores,
                                     const Benchmark& bench,
                                     std::string_view category,
                                     Variant variant);

// (category, value) pairs in display order.
using ScoreRow = std::vector<std::pair<std::string, double>>;

double equal_weight_mean(const ScoreRow& row);

class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::map<std::string, double> weights);

  // Per-category prompt counts of the 80-prompt benchmark.
  static WeightVector vicuna();
  static WeightVector uniform(const std::vector<std::string>& categories);
  static WeightVector from_json(const nlohmann::json& j);
  // "vicuna", "uniform" (over `categories`) or a JSON file path.
  static WeightVector resolve(std::string_view spec,
                              const std::vector<std::string>& categories);

  bool has(std::string_view category) const;
  double raw(std::string_view category) const;
  const std::map<std::string, double>& weights() const { return weights_; }

  // Weights restricted to `categories`, rescaled to sum to 1.
  std::vector<double> normalized(const std::vector<std::string>& categories) const;

 private:
  std::map<std::string, double> weights_;
};

double weighted_mean(const ScoreRow& row, const WeightVector& w);

struct DomainDelta {
  std::string category;
  double delta_pct = 0.0;
  // Zero-shot and refined means rest on different prompt counts.
  bool n_mismatch = false;
};

DomainDelta domain_delta(const CategoryScore& zero, const CategoryScore& refined);

// Mean of per-prompt differences over prompts scored in both variants.
// Differs from domain_delta only when the two sides have different n.
DomainDelta domain_delta_per_prompt(std::string category,
                                    const std::vector<DebiasedScore>& zero,
                                    const std::vector<DebiasedScore>& refined);

double total_refinement_performance(const std::vector<DomainDelta>& deltas,
                                    const WeightVector& w);

// (wins + 0.5 ties) / n; a win is s_m > s_c after averaging both orderings.
double win_rate(const std::vector<DebiasedScore>& scores);

// Percent change from zero-shot to final-response tokens.
double token_change(const std::vector<std::pair<long long, long long>>& zero_final);
double token_change(const std::map<TranscriptKey, RefinementTranscript>& transcripts,
                    const Benchmark& bench, std::string_view category);

struct ScoreCollection {
  std::vector<DebiasedScore> scores;
  // Prompts with no usable ordering.
  std::vector<std::string> excluded;
};

// Re-parses stored judgment events for one (candidate, variant). The first
// event per ordering wins.
ScoreCollection collect_debiased_scores(const std::vector<RunEvent>& events,
                                        std::string_view candidate,
                                        Variant variant);

}  // namespace perfics

#endif  // PERFICS_SCORING_HPP_
