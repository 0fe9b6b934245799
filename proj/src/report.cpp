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

#include "perfics/report.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>

#include "perfics/errors.hpp"

namespace perfics {

TableFormat parse_table_format(std::string_view text) {
  if (text == "markdown" || text == "md") return TableFormat::kMarkdown;
  if (text == "csv") return TableFormat::kCsv;
  throw UsageError("unknown format '" + std::string(text) + "' (markdown|csv)");
}

namespace {

std::string md_text(const ReportCell& c) {
  if (!c.value) {
    std::string out;
    for (char ch : c.text) {
      if (ch == '|') out += '\\';
      out += ch == '\n' ? ' ' : ch;
    }
    return out;
  }
  if (!std::isfinite(*c.value)) return fmt::format("{}", *c.value);
  double v = *c.value;
  if (std::fabs(v) < 0.005) v = 0.0;  // no "-0.00"
  return c.delta ? fmt::format("{:+.2f}", v) : fmt::format("{:.2f}", v);
}

std::string csv_text(const ReportCell& c) {
  if (c.value) return fmt::format("{}", *c.value);
  if (c.text.find_first_of(",\"\n\r") == std::string::npos) return c.text;
  std::string out = "\"";
  for (char ch : c.text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

void append_row(std::string& out, const std::vector<std::string>& cells,
                TableFormat format) {
  if (format == TableFormat::kMarkdown) {
    out += "|";
    for (const auto& c : cells) out += " " + c + " |";
  } else {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
  }
  out += '\n';
}

std::optional<double> as_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  // Only the canonical spelling counts, so emit(load(x)) reproduces x.
  if (fmt::format("{}", v) != s) return std::nullopt;
  return v;
}

}  // namespace

std::string emit_table(const ReportTable& t, TableFormat format) {
  std::string out;
  if (format == TableFormat::kMarkdown) {
    if (!t.title.empty()) out += "### " + t.title + "\n\n";
    append_row(out, t.columns, format);
    std::vector<std::string> rule(t.columns.size(), "---");
    append_row(out, rule, format);
    for (const auto& row : t.rows) {
      std::vector<std::string> cells;
      for (const auto& c : row) cells.push_back(md_text(c));
      append_row(out, cells, format);
    }
    return out;
  }
  std::vector<std::string> header;
  for (const auto& c : t.columns) header.push_back(csv_text(ReportCell::label(c)));
  append_row(out, header, format);
  for (const auto& row : t.rows) {
    std::vector<std::string> cells;
    for (const auto& c : row) cells.push_back(csv_text(c));
    append_row(out, cells, format);
  }
  return out;
}

ReportTable load_csv(std::string_view text, std::string title) {
  std::vector<std::vector<std::pair<std::string, bool>>> records;  // (cell, quoted)
  std::vector<std::pair<std::string, bool>> record;
  std::string cell;
  bool quoted = false;
  bool in_quotes = false;
  bool any = false;
  auto end_cell = [&] {
    record.emplace_back(std::move(cell), quoted);
    cell.clear();
    quoted = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    any = true;
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      in_quotes = true;
      quoted = true;
    } else if (ch == ',') {
      end_cell();
    } else if (ch == '\n') {
      end_cell();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  if (in_quotes) throw ParseError(static_cast<int>(records.size()) + 1, "unterminated quote");
  if (any) {
    end_cell();
    records.push_back(std::move(record));
  }

  ReportTable t;
  t.title = std::move(title);
  if (records.empty()) return t;
  for (auto& [c, q] : records.front()) t.columns.push_back(std::move(c));
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.columns.size()) {
      throw ParseError(static_cast<int>(r) + 1, "row width differs from header");
    }
    std::vector<ReportCell> row;
    for (auto& [c, q] : records[r]) {
      auto v = q ? std::nullopt : as_number(c);
      row.push_back(v ? ReportCell::number(*v) : ReportCell::label(std::move(c)));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

ReportTable ranking_table(const std::vector<PerficsResult>& results) {
  ReportTable t;
  t.title = "PeRFICS ranking";
  t.columns = {"Rank", "Model", "log score", "score", "VRAM cost (GB)"};
  for (const auto& r : results) {
    t.rows.push_back({ReportCell::label(std::to_string(r.rank)),
                      ReportCell::label(r.model), ReportCell::number(r.log_score),
                      r.score ? ReportCell::number(*r.score) : ReportCell::label("overflow"),
                      ReportCell::number(r.cost)});
  }
  return t;
}

namespace {

std::optional<double> lookup(const ScoreRow& row, const std::string& cat) {
  for (const auto& [c, v] : row) {
    if (c == cat) return v;
  }
  return std::nullopt;
}

ReportCell opt_cell(const std::optional<double>& v) {
  return v ? ReportCell::number(*v) : ReportCell::missing();
}

}  // namespace

ReportTable score_table(const std::vector<ModelReport>& reports,
                        const std::vector<std::string>& categories) {
  ReportTable t;
  t.title = "Scores as a % of the control model";
  t.columns = {"Category"};
  for (const auto& r : reports) {
    t.columns.push_back(r.model + " zero-shot");
    t.columns.push_back(r.model + " refined");
  }
  for (const auto& cat : categories) {
    std::vector<ReportCell> row{ReportCell::label(cat)};
    for (const auto& r : reports) {
      row.push_back(opt_cell(lookup(r.zero_shot, cat)));
      row.push_back(opt_cell(lookup(r.refined, cat)));
    }
    t.rows.push_back(std::move(row));
  }
  std::vector<ReportCell> eq{ReportCell::label("Mean (Eq Weight)")};
  std::vector<ReportCell> wt{ReportCell::label("Mean (Vicuna)")};
  std::vector<ReportCell> win{ReportCell::label("Win rate (%)")};
  for (const auto& r : reports) {
    eq.push_back(opt_cell(r.eq_zero_shot));
    eq.push_back(opt_cell(r.eq_refined));
    wt.push_back(opt_cell(r.weighted_zero_shot));
    wt.push_back(opt_cell(r.weighted_refined));
    auto pct = [](const std::optional<double>& v) {
      return v ? std::optional<double>(100.0 * *v) : std::nullopt;
    };
    win.push_back(opt_cell(pct(r.win_rate_zero_shot)));
    win.push_back(opt_cell(pct(r.win_rate_refined)));
  }
  t.rows.push_back(std::move(eq));
  t.rows.push_back(std::move(wt));
  t.rows.push_back(std::move(win));
  return t;
}

ReportTable delta_table(const std::vector<ModelReport>& reports,
                        const std::vector<std::string>& categories) {
  ReportTable t;
  t.title = "Refinement change (percentage points)";
  t.columns = {"Category"};
  for (const auto& r : reports) {
    t.columns.push_back(r.model + " change");
    t.columns.push_back(r.model + " tokens %");
  }
  for (const auto& cat : categories) {
    std::vector<ReportCell> row{ReportCell::label(cat)};
    for (const auto& r : reports) {
      std::optional<double> d;
      for (const auto& x : r.deltas) {
        if (x.category == cat) d = x.delta_pct;
      }
      row.push_back(d ? ReportCell::change(*d) : ReportCell::missing());
      auto tc = r.token_change_pct.find(cat);
      row.push_back(tc != r.token_change_pct.end() ? ReportCell::change(tc->second)
                                                   : ReportCell::missing());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace perfics
