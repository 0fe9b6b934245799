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

#include "perfics/golden.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "json.hpp"
#include "perfics/errors.hpp"

#ifndef PERFICS_DATA_DIR
#define PERFICS_DATA_DIR "data"
#endif

namespace perfics {

namespace {

using nlohmann::json;

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open golden file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.filename().string() + ": " + e.what());
  }
}

std::vector<double> numbers(const json& j, std::size_t expected,
                            const std::string& what) {
  auto v = j.get<std::vector<double>>();
  if (v.size() != expected) {
    throw ConfigError(what + ": expected " + std::to_string(expected) +
                      " values, got " + std::to_string(v.size()));
  }
  return v;
}

PublishedMeans means(const json& j) {
  PublishedMeans m;
  m.zero_shot = j.at("zero_shot").get<double>();
  m.refined = j.at("refined").get<double>();
  if (j.contains("change")) m.change = j.at("change").get<double>();
  return m;
}

GoldenOrderTable order_table(const json& j, std::size_t n, const std::string& what) {
  GoldenOrderTable t;
  t.zero_shot = numbers(j.at("zero_shot"), n, what + " zero_shot");
  t.refined = numbers(j.at("refined"), n, what + " refined");
  t.change = numbers(j.at("change"), n, what + " change");
  t.eq_weight = means(j.at("mean_eq_weight"));
  t.vicuna = means(j.at("mean_vicuna"));
  return t;
}

}  // namespace

const GoldenCategoryRow& GoldenData::row(const std::string& model) const {
  for (const auto& r : category_scores) {
    if (r.model == model) return r;
  }
  throw ConfigError("no golden category scores for '" + model + "'");
}

std::vector<PerficsInput> GoldenData::ranking_inputs() const {
  std::vector<PerficsInput> out;
  for (const auto& r : ranking) out.push_back(r.input);
  return out;
}

std::vector<std::string> GoldenData::ranking_order() const {
  auto rows = ranking;
  std::sort(rows.begin(), rows.end(),
            [](const GoldenRanking& a, const GoldenRanking& b) { return a.rank < b.rank; });
  std::vector<std::string> out;
  for (const auto& r : rows) out.push_back(r.input.model);
  return out;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("PERFICS_DATA_DIR"); env && *env) return env;
  return PERFICS_DATA_DIR;
}

GoldenData load_golden(const std::filesystem::path& dir) {
  GoldenData g;
  try {
    const json cats = read_json(dir / "category_scores.json");
    g.categories = cats.at("categories").get<std::vector<std::string>>();
    for (auto& c : g.categories) c = normalize_category(c);
    const std::size_t n = g.categories.size();
    for (const auto& m : cats.at("models")) {
      GoldenCategoryRow r;
      r.model = m.at("name").get<std::string>();
      r.zero_shot = numbers(m.at("zero_shot"), n, r.model + " zero_shot");
      r.refined = numbers(m.at("refined"), n, r.model + " refined");
      r.eq_weight = means(m.at("mean_eq_weight"));
      r.vicuna = means(m.at("mean_vicuna"));
      g.category_scores.push_back(std::move(r));
    }

    const json orders = read_json(dir / "per_order_scores.json");
    for (const auto& m : orders.at("models")) {
      GoldenPerOrder p;
      p.model = m.at("name").get<std::string>();
      p.order_a = order_table(m.at("order_a"), n, p.model + " order_a");
      p.order_b = order_table(m.at("order_b"), n, p.model + " order_b");
      g.per_order.push_back(std::move(p));
    }

    const json vram = read_json(dir / "vram.json");
    const json ext = read_json(dir / "external_scores.json");
    for (const auto& m : vram.at("models")) {
      ModelProfile p;
      p.name = m.at("name").get<std::string>();
      p.vram_16bit_gb = m.at("vram_16bit_gb").get<double>();
      p.vram_4bit_gb = m.at("vram_4bit_gb").get<double>();
      for (const auto& e : ext.at("models")) {
        if (e.at("name") != p.name) continue;
        for (const auto& [k, v] : e.items()) {
          if (k != "name") p.external_scores[k] = v.get<double>();
        }
      }
      validate_profile(p);
      g.profiles.push_back(std::move(p));
    }

    const json ranking = read_json(dir / "ranking.json");
    for (const auto& r : ranking.at("rows")) {
      GoldenRanking row;
      row.rank = r.at("rank").get<int>();
      row.input.model = r.at("model").get<std::string>();
      row.input.cost = r.at("vram_cost").get<double>();
      row.input.baseline = r.at("baseline").get<double>();
      row.input.refined = r.at("refined").get<double>();
      row.input.external = r.at("ext_avg").get<double>();
      g.ranking.push_back(std::move(row));
    }

    g.params = perfics_params_from_json(read_json(dir / "perfics_params.json"));

    const json scenarios = read_json(dir / "scenarios.json");
    for (const auto& s : scenarios.at("scenarios")) {
      GoldenScenario sc;
      sc.name = s.at("name").get<std::string>();
      if (!s.at("vram_budget_gb").is_null()) {
        sc.vram_budget_gb = s.at("vram_budget_gb").get<double>();
      }
      sc.quant_bits = s.at("quant_bits").get<int>();
      sc.category = normalize_category(s.at("category").get<std::string>());
      sc.gamma = s.at("gamma").get<double>();
      sc.expected_top = s.at("expected_top").get<std::string>();
      g.scenarios.push_back(std::move(sc));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("golden data: ") + e.what());
  }
  return g;
}

ScoreRow golden_row(const GoldenData& g, const std::vector<double>& values) {
  ScoreRow row;
  for (std::size_t i = 0; i < g.categories.size() && i < values.size(); ++i) {
    row.emplace_back(g.categories[i], values[i]);
  }
  return row;
}

std::vector<CategoryPerformance> golden_performance(const GoldenData& g) {
  std::vector<CategoryPerformance> out;
  for (const auto& r : g.category_scores) {
    CategoryPerformance p;
    p.model = r.model;
    for (std::size_t i = 0; i < g.categories.size(); ++i) {
      p.zero_shot[g.categories[i]] = r.zero_shot[i];
      p.refined[g.categories[i]] = r.refined[i];
    }
    out.push_back(std::move(p));
  }
  return out;
}

ReportTable category_table(const GoldenData& g) {
  ReportTable t;
  t.title = "Scores as a % of the control model";
  t.columns = {"Category"};
  for (const auto& r : g.category_scores) {
    t.columns.push_back(r.model + " zero-shot");
    t.columns.push_back(r.model + " refined");
  }
  for (std::size_t i = 0; i < g.categories.size(); ++i) {
    std::vector<ReportCell> row{ReportCell::label(g.categories[i])};
    for (const auto& r : g.category_scores) {
      row.push_back(ReportCell::number(r.zero_shot[i]));
      row.push_back(ReportCell::number(r.refined[i]));
    }
    t.rows.push_back(std::move(row));
  }
  std::vector<ReportCell> eq{ReportCell::label("Mean (Eq Weight)")};
  std::vector<ReportCell> wt{ReportCell::label("Mean (Vicuna)")};
  const WeightVector w = WeightVector::vicuna();
  for (const auto& r : g.category_scores) {
    eq.push_back(ReportCell::number(equal_weight_mean(golden_row(g, r.zero_shot))));
    eq.push_back(ReportCell::number(equal_weight_mean(golden_row(g, r.refined))));
    wt.push_back(ReportCell::number(weighted_mean(golden_row(g, r.zero_shot), w)));
    wt.push_back(ReportCell::number(weighted_mean(golden_row(g, r.refined), w)));
  }
  t.rows.push_back(std::move(eq));
  t.rows.push_back(std::move(wt));
  return t;
}

ReportTable per_order_table(const GoldenData& g, const std::string& model) {
  const GoldenPerOrder* p = nullptr;
  for (const auto& x : g.per_order) {
    if (x.model == model) p = &x;
  }
  if (p == nullptr) throw ConfigError("no per-order scores for '" + model + "'");
  ReportTable t;
  t.title = model + " per ordering";
  t.columns = {"Category", "A zero-shot", "A refined", "A change",
               "B zero-shot", "B refined", "B change"};
  for (std::size_t i = 0; i < g.categories.size(); ++i) {
    t.rows.push_back({ReportCell::label(g.categories[i]),
                      ReportCell::number(p->order_a.zero_shot[i]),
                      ReportCell::number(p->order_a.refined[i]),
                      ReportCell::change(p->order_a.refined[i] - p->order_a.zero_shot[i]),
                      ReportCell::number(p->order_b.zero_shot[i]),
                      ReportCell::number(p->order_b.refined[i]),
                      ReportCell::change(p->order_b.refined[i] - p->order_b.zero_shot[i])});
  }
  return t;
}

}  // namespace perfics
