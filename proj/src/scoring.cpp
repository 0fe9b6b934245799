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

#include "perfics/scoring.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <optional>
#include <set>

#include "perfics/errors.hpp"

namespace perfics {

CategoryScore category_relative_mean(const std::vector<double>& s_r,
                                     std::string category, Variant variant) {
  if (s_r.empty()) {
    throw EmptyCategory("no valid scores in category '" + category + "'");
  }
  double sum = 0.0;
  for (double v : s_r) sum += v;
  CategoryScore out;
  out.category = std::move(category);
  out.variant = variant;
  out.mean_relative_pct = 100.0 * sum / static_cast<double>(s_r.size());
  out.n = static_cast<int>(s_r.size());
  return out;
}

CategoryScore category_relative_mean(const std::vector<DebiasedScore>& scores,
                                     const Benchmark& bench,
                                     std::string_view category,
                                     Variant variant) {
  const std::string cat = normalize_category(category);
  std::vector<double> picked;
  std::set<std::string> seen;
  for (const auto& s : scores) {
    const TaskPrompt* p = bench.find(s.prompt_id);
    if (p == nullptr || p->category != cat) continue;
    if (!seen.insert(s.prompt_id).second) {
      throw DuplicateIdError("prompt '" + s.prompt_id + "' scored twice");
    }
    picked.push_back(s.s_r);
  }
  CategoryScore out = category_relative_mean(picked, cat, variant);
  for (const auto& c : bench.categories) {
    if (c.name == cat && out.n > c.prompt_count) {
      throw InvariantViolation("n", "more scores than prompts in " + cat);
    }
  }
  return out;
}

double equal_weight_mean(const ScoreRow& row) {
  if (row.empty()) throw EmptyCategory("empty score row");
  double sum = 0.0;
  for (const auto& [cat, v] : row) sum += v;
  return sum / static_cast<double>(row.size());
}

WeightVector::WeightVector(std::map<std::string, double> weights) {
  bool any = false;
  for (const auto& [cat, w] : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw ConfigError("weight for '" + cat + "' must be finite and >= 0");
    }
    any = any || w > 0.0;
    weights_[normalize_category(cat)] += w;
  }
  if (!any) throw ConfigError("weight vector is all zero");
}

WeightVector WeightVector::vicuna() {
  std::map<std::string, double> w;
  for (const auto& c : vicuna_categories()) w[c.name] = c.prompt_count;
  return WeightVector(std::move(w));
}

WeightVector WeightVector::uniform(const std::vector<std::string>& categories) {
  std::map<std::string, double> w;
  for (const auto& c : categories) w[c] = 1.0;
  return WeightVector(std::move(w));
}

WeightVector WeightVector::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("weights must be a JSON object");
  std::map<std::string, double> w;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw ConfigError("weight for '" + k + "' is not a number");
    w[k] = v.get<double>();
  }
  return WeightVector(std::move(w));
}

WeightVector WeightVector::resolve(std::string_view spec,
                                   const std::vector<std::string>& categories) {
  if (spec == "vicuna") return vicuna();
  if (spec == "uniform") {
    if (!categories.empty()) return uniform(categories);
    std::vector<std::string> names;
    for (const auto& c : vicuna_categories()) names.push_back(c.name);
    return uniform(names);
  }
  std::ifstream in{std::string(spec)};
  if (!in) throw ConfigError("cannot open weights file '" + std::string(spec) + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("weights file '" + std::string(spec) + "': " + e.what());
  }
}

bool WeightVector::has(std::string_view category) const {
  return weights_.count(normalize_category(category)) > 0;
}

double WeightVector::raw(std::string_view category) const {
  auto it = weights_.find(normalize_category(category));
  if (it == weights_.end()) {
    throw MissingWeight("no weight for category '" + std::string(category) + "'");
  }
  return it->second;
}

std::vector<double> WeightVector::normalized(
    const std::vector<std::string>& categories) const {
  std::vector<double> out;
  out.reserve(categories.size());
  double total = 0.0;
  for (const auto& c : categories) {
    out.push_back(raw(c));
    total += out.back();
  }
  if (!(total > 0.0)) {
    throw MissingWeight("all selected categories have zero weight");
  }
  for (double& w : out) w /= total;
  return out;
}

namespace {

std::vector<std::string> names_of(const ScoreRow& row) {
  std::vector<std::string> out;
  for (const auto& [cat, v] : row) out.push_back(cat);
  return out;
}

}  // namespace

double weighted_mean(const ScoreRow& row, const WeightVector& w) {
  if (row.empty()) throw EmptyCategory("empty score row");
  const auto ws = w.normalized(names_of(row));
  double sum = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) sum += ws[i] * row[i].second;
  return sum;
}

DomainDelta domain_delta(const CategoryScore& zero, const CategoryScore& refined) {
  if (normalize_category(zero.category) != normalize_category(refined.category)) {
    throw CategoryMismatch("cannot difference '" + refined.category + "' and '" +
                           zero.category + "'");
  }
  DomainDelta d;
  d.category = zero.category;
  d.delta_pct = refined.mean_relative_pct - zero.mean_relative_pct;
  d.n_mismatch = zero.n != refined.n;
  if (d.n_mismatch) {
    spdlog::warn("{}: zero-shot n={} vs refined n={}", d.category, zero.n,
                 refined.n);
  }
  return d;
}

DomainDelta domain_delta_per_prompt(std::string category,
                                    const std::vector<DebiasedScore>& zero,
                                    const std::vector<DebiasedScore>& refined) {
  std::map<std::string, double> z;
  for (const auto& s : zero) z.emplace(s.prompt_id, s.s_r);
  double sum = 0.0;
  int n = 0;
  for (const auto& s : refined) {
    auto it = z.find(s.prompt_id);
    if (it == z.end()) continue;
    sum += s.s_r - it->second;
    ++n;
  }
  if (n == 0) {
    throw EmptyCategory("no prompt scored in both variants for '" + category + "'");
  }
  DomainDelta d;
  d.category = std::move(category);
  d.delta_pct = 100.0 * sum / n;
  d.n_mismatch = static_cast<std::size_t>(n) != zero.size() ||
                 static_cast<std::size_t>(n) != refined.size();
  return d;
}

double total_refinement_performance(const std::vector<DomainDelta>& deltas,
                                    const WeightVector& w) {
  if (deltas.empty()) return 0.0;
  std::vector<std::string> cats;
  for (const auto& d : deltas) cats.push_back(d.category);
  const auto ws = w.normalized(cats);
  double sum = 0.0;
  for (std::size_t i = 0; i < deltas.size(); ++i) sum += ws[i] * deltas[i].delta_pct;
  return sum;
}

double win_rate(const std::vector<DebiasedScore>& scores) {
  if (scores.empty()) throw EmptyCategory("win rate over zero prompts");
  double points = 0.0;
  for (const auto& s : scores) {
    if (s.s_m > s.s_c) {
      points += 1.0;
    } else if (s.s_m == s.s_c) {
      points += 0.5;
    }
  }
  return points / static_cast<double>(scores.size());
}

double token_change(const std::vector<std::pair<long long, long long>>& zero_final) {
  long long zero = 0;
  long long fin = 0;
  for (const auto& [z, f] : zero_final) {
    zero += z;
    fin += f;
  }
  if (zero == 0) throw ZeroBaselineTokens("zero-shot token total is 0");
  return 100.0 * static_cast<double>(fin - zero) / static_cast<double>(zero);
}

double token_change(const std::map<TranscriptKey, RefinementTranscript>& transcripts,
                    const Benchmark& bench, std::string_view category) {
  const std::string cat = normalize_category(category);
  std::vector<std::pair<long long, long long>> rows;
  for (const auto& [key, t] : transcripts) {
    const TaskPrompt* p = bench.find(t.prompt_id);
    if (p == nullptr || p->category != cat || t.rounds.empty()) continue;
    rows.emplace_back(t.zero_shot_tokens(), t.final_tokens());
  }
  return token_change(rows);
}

ScoreCollection collect_debiased_scores(const std::vector<RunEvent>& events,
                                        std::string_view candidate,
                                        Variant variant) {
  struct Slots {
    std::optional<std::string> mf;
    std::optional<std::string> cf;
  };
  std::map<std::string, Slots> raw;
  std::vector<std::string> order;
  for (const auto& e : events) {
    if (e.kind != EventKind::kJudgment || e.model != candidate ||
        e.variant != variant || !e.ordering) {
      continue;
    }
    auto [it, fresh] = raw.try_emplace(e.prompt_id);
    if (fresh) order.push_back(e.prompt_id);
    auto& slot = *e.ordering == Ordering::kModelFirst ? it->second.mf : it->second.cf;
    if (!slot) slot = e.content;
  }
  ScoreCollection out;
  for (const auto& id : order) {
    const Slots& s = raw[id];
    auto parse = [&](const std::optional<std::string>& text,
                     Ordering o) -> std::optional<PairwiseJudgment> {
      if (!text) return std::nullopt;
      try {
        return make_judgment(id, o, parse_judgment(*text));
      } catch (const JudgmentParseError&) {
      } catch (const ScoreOutOfRange&) {
      }
      return std::nullopt;
    };
    try {
      out.scores.push_back(combine_orderings(
          id, parse(s.mf, Ordering::kModelFirst), parse(s.cf, Ordering::kControlFirst)));
    } catch (const JudgmentUnavailable&) {
      out.excluded.push_back(id);
    }
  }
  return out;
}

}  // namespace perfics
