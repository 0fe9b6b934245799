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

#include <cstdlib>
#include <fstream>
#include <random>

#include "perfics/errors.hpp"
#include "perfics/golden.hpp"
#include "perfics/report.hpp"

namespace perfics {
namespace {

const GoldenData& golden() {
  static const GoldenData g = load_golden(PERFICS_TEST_DATA_DIR "/golden");
  return g;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Set PERFICS_UPDATE_SNAPSHOTS=1 to rewrite a snapshot after a deliberate
// format change.
void expect_snapshot(const std::string& name, const std::string& actual) {
  const std::filesystem::path path = std::filesystem::path(PERFICS_SNAPSHOT_DIR) / name;
  if (std::getenv("PERFICS_UPDATE_SNAPSHOTS") != nullptr) {
    std::ofstream(path, std::ios::binary | std::ios::trunc) << actual;
  }
  ASSERT_TRUE(std::filesystem::exists(path)) << path;
  EXPECT_EQ(read_file(path), actual);
}

TEST(EmitTable, EmptyTableIsHeaderOnly) {
  ReportTable t;
  t.columns = {"Model", "Score"};
  EXPECT_EQ(emit_table(t, TableFormat::kMarkdown), "| Model | Score |\n| --- | --- |\n");
  EXPECT_EQ(emit_table(t, TableFormat::kCsv), "Model,Score\n");
}

TEST(EmitTable, MarkdownNumbers) {
  ReportTable t{"T", {"a", "b", "c", "d"}, {}};
  t.rows.push_back({ReportCell::number(81.605), ReportCell::change(-0.001),
                    ReportCell::change(13.44), ReportCell::missing()});
  const auto md = emit_table(t, TableFormat::kMarkdown);
  EXPECT_NE(md.find("### T\n\n"), std::string::npos);
  EXPECT_NE(md.find("| +0.00 |"), std::string::npos) << md;
  EXPECT_EQ(md.find("-0.00"), std::string::npos);
  EXPECT_NE(md.find("| +13.44 |"), std::string::npos);
  EXPECT_NE(md.find("| - |"), std::string::npos);
}

TEST(EmitTable, CategoryTableMatchesSnapshot) {
  expect_snapshot("category_table.md", emit_table(category_table(golden()), TableFormat::kMarkdown));
}

TEST(EmitTable, PerOrderTableMatchesSnapshot) {
  expect_snapshot("per_order_airoboros.md",
                  emit_table(per_order_table(golden(), "Airoboros-7B"), TableFormat::kMarkdown));
}

TEST(EmitTable, RankingTableMatchesSnapshot) {
  const auto ranked = rank_models(golden().ranking_inputs(), golden().params);
  expect_snapshot("ranking.md", emit_table(ranking_table(ranked), TableFormat::kMarkdown));
}

TEST(Csv, GoldenTablesAreFixedPoints) {
  for (const auto& t : {category_table(golden()), per_order_table(golden(), "Vicuna-13B")}) {
    const auto once = emit_table(t, TableFormat::kCsv);
    EXPECT_EQ(emit_table(load_csv(once), TableFormat::kCsv), once);
  }
}

TEST(Csv, KeepsFullPrecision) {
  ReportTable t{"", {"x"}, {{ReportCell::number(0.1 + 0.2)}}};
  const auto csv = emit_table(t, TableFormat::kCsv);
  const auto back = load_csv(csv);
  ASSERT_EQ(back.rows.size(), 1u);
  ASSERT_TRUE(back.rows[0][0].value.has_value());
  EXPECT_EQ(*back.rows[0][0].value, 0.1 + 0.2);
}

TEST(Csv, RandomTablesRoundTrip) {
  std::mt19937_64 rng(21);
  const std::string alphabet = "ab ,\"\n-+.0123456789e";
  std::uniform_real_distribution<double> num(-1e6, 1e6);
  for (int trial = 0; trial < 300; ++trial) {
    ReportTable t;
    const int cols = 1 + rng() % 4;
    for (int c = 0; c < cols; ++c) t.columns.push_back("c" + std::to_string(c));
    const int rows = rng() % 5;
    for (int r = 0; r < rows; ++r) {
      std::vector<ReportCell> row;
      for (int c = 0; c < cols; ++c) {
        if (rng() % 2) {
          row.push_back(ReportCell::number(num(rng)));
        } else {
          std::string s;
          for (int k = rng() % 6; k > 0; --k) s += alphabet[rng() % alphabet.size()];
          row.push_back(ReportCell::label(s));
        }
      }
      t.rows.push_back(std::move(row));
    }
    const auto once = emit_table(t, TableFormat::kCsv);
    const auto twice = emit_table(load_csv(once), TableFormat::kCsv);
    ASSERT_EQ(twice, once) << once;
  }
}

TEST(Format, Parse) {
  EXPECT_EQ(parse_table_format("markdown"), TableFormat::kMarkdown);
  EXPECT_EQ(parse_table_format("csv"), TableFormat::kCsv);
  EXPECT_THROW(parse_table_format("xlsx"), UsageError);
}

TEST(Verify, PristineDataPasses) {
  for (const auto& c : {check_equal_weight_means(golden()), check_weighted_means(golden()),
                        check_debias_averaging(golden()), check_change_columns(golden()),
                        check_ranking(golden()), check_scenarios(golden())}) {
    EXPECT_TRUE(c.pass) << format_check(c);
  }
}

TEST(Verify, PerturbedCellFailsItsMeanChecks) {
  GoldenData g = golden();
  for (auto& row : g.category_scores) {
    if (row.model == "Airoboros-7B") row.zero_shot[0] += 1.0;
  }
  EXPECT_FALSE(check_equal_weight_means(g).pass);
  EXPECT_FALSE(check_weighted_means(g).pass);
  EXPECT_FALSE(check_debias_averaging(g).pass);
  EXPECT_TRUE(check_change_columns(g).pass);
  EXPECT_TRUE(check_ranking(g).pass);
  EXPECT_TRUE(check_scenarios(g).pass);
}

TEST(Verify, PerturbedChangeCellFails) {
  GoldenData g = golden();
  g.per_order[0].order_a.change[3] += 1.0;
  EXPECT_FALSE(check_change_columns(g).pass);
  EXPECT_TRUE(check_equal_weight_means(g).pass);
}

TEST(Verify, AlphaOneBreaksRanking) {
  GoldenData g = golden();
  g.params.alpha = 1.0;
  const auto c = check_ranking(g);
  EXPECT_FALSE(c.pass);
  const auto ranked = rank_models(g.ranking_inputs(), g.params);
  EXPECT_EQ(ranked[1].model, "Vicuna-13B");
  EXPECT_TRUE(check_equal_weight_means(g).pass);
}

TEST(Verify, FormatCheckLabels) {
  CheckResult gating{"1", "x", true, true, "ok", 1.0};
  CheckResult note{"3r", "y", false, false, "drift", 1.0};
  EXPECT_EQ(format_check(gating).rfind("[PASS]", 0), 0u);
  EXPECT_EQ(format_check(note).rfind("[NOTE]", 0), 0u);
  EXPECT_TRUE(all_gating_pass({gating, note}));
  gating.pass = false;
  EXPECT_FALSE(all_gating_pass({gating, note}));
}

}  // namespace
}  // namespace perfics
