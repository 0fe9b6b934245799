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

#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "perfics/errors.hpp"
#include "perfics/golden.hpp"
#include "perfics/perfics.hpp"

namespace perfics {
namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

// Direct evaluation of the ratio at 50 digits, then the log.
Big big_log_psi_exact(const PerficsInput& in, const PerficsParams& p) {
  const Big a = Big(p.alpha) * Big(in.baseline) + Big(p.beta) * (Big(in.refined) - Big(in.baseline));
  const Big num = Big(p.eta) * exp(Big(p.kappa) * a) + Big(p.rho) * Big(in.external);
  const Big den = exp(Big(p.gamma) * Big(in.cost)) + Big(p.delta);
  return log(num / den);
}

double big_log_psi(const PerficsInput& in, const PerficsParams& p) {
  return static_cast<double>(big_log_psi_exact(in, p));
}

const std::vector<PerficsInput> kTable = {
    {"GPT4X-Alpasta-30B", 92.71, 102.57, 57.9, 12.65},
    {"Vicuna-7B", 89.31, 99.80, 52.5, 4.13},
    {"Vicuna-13B", 94.53, 101.72, 53.7, 7.41},
    {"Guanaco-65B", 98.24, 103.48, 62.2, 34.95},
    {"Airoboros-7B", 55.60, 52.30, 79.1, 4.44},
};

TEST(PerficsParams, DefaultsAndValidation) {
  const PerficsParams p;
  EXPECT_EQ(p.alpha, 0.5);
  EXPECT_EQ(p.beta, 1.0);
  EXPECT_EQ(p.rho, 0.5);
  EXPECT_EQ(p.eta, 1.0);
  EXPECT_EQ(p.kappa, 0.5);
  EXPECT_EQ(p.gamma, 0.05);
  EXPECT_EQ(p.delta, 1e-5);
  EXPECT_NO_THROW(p.validate());
  auto bad = p;
  bad.eta = 0;
  EXPECT_THROW(bad.validate(), InvariantViolation);
  bad = p;
  bad.gamma = -0.1;
  EXPECT_THROW(bad.validate(), InvariantViolation);
  bad = p;
  bad.alpha = std::nan("");
  EXPECT_THROW(bad.validate(), NonFiniteInput);
  EXPECT_EQ(perfics_params_from_json(to_json(p)), p);
  EXPECT_EQ(perfics_params_from_json(nlohmann::json::parse(R"({"gamma":0.15})")).gamma, 0.15);
  EXPECT_THROW(perfics_params_from_json(nlohmann::json::parse(R"({"gama":0.15})")),
               ConfigError);
}

TEST(PerficsScore, AlpastaAnchor) {
  const double v = perfics_log_score(kTable[0], PerficsParams{});
  EXPECT_NEAR(v, 27.4750, 0.001);
  EXPECT_NEAR(v, big_log_psi(kTable[0], PerficsParams{}), 1e-12 * std::abs(v));
}

TEST(PerficsScore, AllZeroInputs) {
  const PerficsInput z{"z", 0, 0, 0, 0};
  EXPECT_NEAR(perfics_log_score(z, PerficsParams{}), -std::log1p(1e-5), 1e-15);
}

TEST(PerficsScore, MatchesHighPrecisionOracle) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> pct(0, 150);
  std::uniform_real_distribution<double> ext(0, 100);
  std::uniform_real_distribution<double> cost(0, 200);
  std::uniform_real_distribution<double> unit(0.01, 2.0);
  for (int i = 0; i < 2000; ++i) {
    PerficsParams p;
    p.alpha = unit(rng);
    p.beta = unit(rng);
    p.rho = unit(rng);
    p.eta = unit(rng);
    p.kappa = unit(rng);
    p.gamma = unit(rng) / 4;
    const PerficsInput in{"m", pct(rng), pct(rng), ext(rng), cost(rng)};
    const double got = perfics_log_score(in, p);
    const double want = big_log_psi(in, p);
    EXPECT_NEAR(got, want, 1e-12 * std::max(1.0, std::abs(want))) << i;
  }
}

TEST(PerficsScore, DirectAgreesWhenRepresentable) {
  for (const auto& in : kTable) {
    const double direct = perfics_direct(in, PerficsParams{});
    ASSERT_TRUE(std::isfinite(direct));
    EXPECT_NEAR(std::log(direct), perfics_log_score(in, PerficsParams{}), 1e-9 * std::log(direct));
  }
}

TEST(PerficsScore, HugeExponentStaysFinite) {
  PerficsParams p;
  p.kappa = 50;
  const PerficsInput in{"m", 100, 150, 50, 1};
  const double v = perfics_log_score(in, p);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, big_log_psi(in, p), 1e-12 * v);
  const auto ranked = rank_models({in}, p);
  EXPECT_FALSE(ranked[0].score.has_value());
  EXPECT_EQ(ranked[0].log_score, v);
}

TEST(PerficsScore, NonFiniteInputRejected) {
  PerficsInput in{"m", std::numeric_limits<double>::infinity(), 1, 1, 1};
  EXPECT_THROW(perfics_log_score(in, PerficsParams{}), NonFiniteInput);
  in = {"m", 1, 1, std::nan(""), 1};
  EXPECT_THROW(perfics_log_score(in, PerficsParams{}), NonFiniteInput);
}

TEST(PerficsScore, MonotoneInEachInput) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pct(0, 150);
  std::uniform_real_distribution<double> ext(0, 100);
  std::uniform_real_distribution<double> cost(0, 80);
  std::uniform_real_distribution<double> bump(0.5, 10);
  const PerficsParams p;
  for (int i = 0; i < 1000; ++i) {
    const PerficsInput a{"a", pct(rng), pct(rng), ext(rng), cost(rng)};
    const double base = perfics_log_score(a, p);
    const double d = bump(rng);
    auto c = a;
    c.cost += d;
    EXPECT_LT(perfics_log_score(c, p), base);
    auto e = a;
    e.external += d;
    // rho*E can sit below one ulp of exp(kappa*A); strict only at high precision.
    EXPECT_GE(perfics_log_score(e, p), base);
    EXPECT_TRUE(big_log_psi_exact(e, p) > big_log_psi_exact(a, p));
    auto r = a;
    r.refined += d;  // raises I only
    EXPECT_GT(perfics_log_score(r, p), base);
    auto b = a;
    b.baseline += d;
    b.refined += d;  // raises B with I held fixed
    EXPECT_GT(perfics_log_score(b, p), base);
  }
}

TEST(PerficsScore, ExternalTermCountsWhenComparable) {
  PerficsParams p;
  p.kappa = 0.01;
  const PerficsInput a{"a", 50, 60, 40, 3};
  auto e = a;
  e.external += 1;
  EXPECT_GT(perfics_log_score(e, p), perfics_log_score(a, p));
}

TEST(RankModels, PublishedOrder) {
  const auto ranked = rank_models(kTable, PerficsParams{});
  ASSERT_EQ(ranked.size(), 5u);
  const std::vector<std::string> want = {"GPT4X-Alpasta-30B", "Vicuna-7B", "Vicuna-13B",
                                         "Guanaco-65B", "Airoboros-7B"};
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(ranked[i].model, want[i]);
    EXPECT_EQ(ranked[i].rank, static_cast<int>(i + 1));
    ASSERT_TRUE(ranked[i].score.has_value());
    if (i > 0) {
      EXPECT_LT(*ranked[i].score, *ranked[i - 1].score);
    }
  }
}

TEST(RankModels, OracleOrderAgrees) {
  std::vector<std::pair<double, std::string>> oracle;
  for (const auto& in : kTable) oracle.emplace_back(-big_log_psi(in, PerficsParams{}), in.model);
  std::sort(oracle.begin(), oracle.end());
  const auto ranked = rank_models(kTable, PerficsParams{});
  for (std::size_t i = 0; i < oracle.size(); ++i) EXPECT_EQ(ranked[i].model, oracle[i].second);
}

TEST(RankModels, TieBreakAndErrors) {
  const PerficsInput a{"a", 90, 100, 50, 5};
  auto b = a;
  b.model = "b";
  b.cost = 4;
  auto ranked = rank_models({a, b}, PerficsParams{});
  EXPECT_EQ(ranked[0].model, "b");
  EXPECT_EQ(rank_models({a}, PerficsParams{})[0].rank, 1);
  PerficsParams flat;
  flat.gamma = 0;
  auto c = a;
  c.model = "0c";
  ranked = rank_models({a, c}, flat);
  EXPECT_EQ(ranked[0].model, "0c");
  EXPECT_EQ(ranked[0].log_score, ranked[1].log_score);
  EXPECT_THROW(rank_models({a, a}, PerficsParams{}), DuplicateModel);
  EXPECT_THROW(rank_models({}, PerficsParams{}), InvariantViolation);
}

class Scenarios : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { golden_ = new GoldenData(load_golden(PERFICS_TEST_DATA_DIR "/golden")); }
  static void TearDownTestSuite() { delete golden_; }
  static std::string top(std::optional<double> budget, std::string cat, double gamma) {
    ScenarioConstraints c;
    c.vram_budget_gb = budget;
    c.quant_bits = 4;
    c.focus = std::move(cat);
    c.gamma_override = gamma;
    return scenario_rank(golden_performance(*golden_), golden_->profiles, c,
                         PerficsParams{})
        .front()
        .model;
  }
  static GoldenData* golden_;
};
GoldenData* Scenarios::golden_ = nullptr;

TEST_F(Scenarios, SmallCardWriting) { EXPECT_EQ(top(12.0, "writing", 0.15), "Vicuna-7B"); }
TEST_F(Scenarios, MidCardRoleplay) { EXPECT_EQ(top(24.0, "roleplay", 0.15), "Vicuna-13B"); }
TEST_F(Scenarios, UnconstrainedCoding) {
  EXPECT_EQ(top(std::nullopt, "coding", 0.0), "GPT4X-Alpasta-30B");
}

TEST_F(Scenarios, BudgetFiltersAndErrors) {
  ScenarioConstraints c;
  c.vram_budget_gb = 5.0;
  const auto r = scenario_rank(golden_performance(*golden_), golden_->profiles, c,
                               PerficsParams{});
  for (const auto& x : r) EXPECT_LE(x.cost, 5.0);
  c.vram_budget_gb = 0.5;
  EXPECT_THROW(scenario_rank(golden_performance(*golden_), golden_->profiles, c,
                             PerficsParams{}),
               NoFeasibleModel);
  c.vram_budget_gb.reset();
  c.quant_bits = 8;
  EXPECT_THROW(scenario_rank(golden_performance(*golden_), golden_->profiles, c,
                             PerficsParams{}),
               ConfigError);
}

TEST_F(Scenarios, WeightedFocusUsesWeightedMeans) {
  ScenarioConstraints c;
  c.focus = WeightVector({{"writing", 1.0}});
  c.gamma_override = 0.15;
  c.vram_budget_gb = 12.0;
  const auto r = scenario_rank(golden_performance(*golden_), golden_->profiles, c,
                               PerficsParams{});
  EXPECT_EQ(r.front().model, "Vicuna-7B");
}

}  // namespace
}  // namespace perfics
