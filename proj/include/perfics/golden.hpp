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

#ifndef PERFICS_GOLDEN_HPP_
#define PERFICS_GOLDEN_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "perfics/perfics.hpp"
#include "perfics/report.hpp"
#include "perfics/types.hpp"

namespace perfics {

struct PublishedMeans {
  double zero_shot = 0.0;
  double refined = 0.0;
  std::optional<double> change;
};

struct GoldenCategoryRow {
  std::string model;
  std::vector<double> zero_shot;
  std::vector<double> refined;
  PublishedMeans eq_weight;
  PublishedMeans vicuna;
};

struct GoldenOrderTable {
  std::vector<double> zero_shot;
  std::vector<double> refined;
  std::vector<double> change;
  PublishedMeans eq_weight;
  PublishedMeans vicuna;
};

struct GoldenPerOrder {
  std::string model;
  GoldenOrderTable order_a;
  GoldenOrderTable order_b;
};

struct GoldenRanking {
  int rank = 0;
  PerficsInput input;
};

struct GoldenScenario {
  std::string name;
  std::optional<double> vram_budget_gb;
  int quant_bits = 4;
  std::string category;
  double gamma = 0.0;
  std::string expected_top;
};

struct GoldenData {
  std::vector<std::string> categories;
  std::vector<ModelProfile> profiles;
  std::vector<GoldenCategoryRow> category_scores;
  std::vector<GoldenPerOrder> per_order;
  std::vector<GoldenRanking> ranking;
  PerficsParams params;
  std::vector<GoldenScenario> scenarios;

  const GoldenCategoryRow& row(const std::string& model) const;
  std::vector<PerficsInput> ranking_inputs() const;
  std::vector<std::string> ranking_order() const;
};

// Reads the JSON files under `dir` (vram, external_scores, category_scores,
// per_order_scores, ranking, perfics_params, scenarios).
GoldenData load_golden(const std::filesystem::path& dir);

// Directory baked in at build time, overridable with PERFICS_DATA_DIR.
std::filesystem::path default_data_dir();

std::vector<CategoryPerformance> golden_performance(const GoldenData& g);
ScoreRow golden_row(const GoldenData& g, const std::vector<double>& values);

ReportTable category_table(const GoldenData& g);
ReportTable per_order_table(const GoldenData& g, const std::string& model);

struct VerifyOptions {
  std::size_t fuzz_inputs = 100000;
  std::size_t property_pairs = 2000;
  std::uint64_t seed = 20240601;
  // Fresh directory for the replay run; a temporary one when empty.
  std::filesystem::path scratch_dir;
  int prompts_per_category = 1;
};

struct CheckResult {
  std::string id;
  std::string name;
  bool pass = false;
  // Informational lines do not affect the exit status.
  bool gating = true;
  std::string detail;
  double millis = 0.0;
};

std::vector<CheckResult> verify_golden(const GoldenData& g, const VerifyOptions& opts);
std::string format_check(const CheckResult& c);
bool all_gating_pass(const std::vector<CheckResult>& results);

// The individual checks, exposed for tests.
CheckResult check_equal_weight_means(const GoldenData& g);
CheckResult check_weighted_means(const GoldenData& g);
CheckResult check_debias_averaging(const GoldenData& g);
CheckResult check_refined_debias_cells(const GoldenData& g);
CheckResult check_per_order_means(const GoldenData& g);
CheckResult check_change_columns(const GoldenData& g);
CheckResult check_ranking(const GoldenData& g);
CheckResult check_scenarios(const GoldenData& g);
CheckResult check_monotonicity(std::size_t pairs, std::uint64_t seed);
CheckResult check_parser_fuzz(std::size_t inputs, std::uint64_t seed);
CheckResult check_replay_resume(const VerifyOptions& opts);
CheckResult check_aggregation_identities(const GoldenData& g, std::size_t samples,
                                         std::uint64_t seed);

// log of the ratio evaluated with 50 significant digits.
double perfics_log_oracle(const PerficsInput& in, const PerficsParams& p);

}  // namespace perfics

#endif  // PERFICS_GOLDEN_HPP_
