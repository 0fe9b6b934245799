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

#ifndef PERFICS_REPORT_HPP_
#define PERFICS_REPORT_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "perfics/perfics.hpp"
#include "perfics/pipeline.hpp"

namespace perfics {

struct ReportCell {
  std::string text;
  std::optional<double> value;
  // Rendered with an explicit sign in markdown.
  bool delta = false;

  static ReportCell label(std::string s) { return {std::move(s), std::nullopt, false}; }
  static ReportCell number(double v) { return {{}, v, false}; }
  static ReportCell change(double v) { return {{}, v, true}; }
  static ReportCell missing() { return {"-", std::nullopt, false}; }
};

struct ReportTable {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<ReportCell>> rows;
};

enum class TableFormat { kMarkdown, kCsv };
TableFormat parse_table_format(std::string_view text);

// Markdown: two decimals, signed deltas. CSV: shortest round-trip numbers.
std::string emit_table(const ReportTable& t, TableFormat format);

// Reads emit_table's CSV output. Numeric-looking cells become numbers.
ReportTable load_csv(std::string_view text, std::string title = {});

ReportTable ranking_table(const std::vector<PerficsResult>& results);
ReportTable score_table(const std::vector<ModelReport>& reports,
                        const std::vector<std::string>& categories);
ReportTable delta_table(const std::vector<ModelReport>& reports,
                        const std::vector<std::string>& categories);

}  // namespace perfics

#endif  // PERFICS_REPORT_HPP_
