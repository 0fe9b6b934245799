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

#include "perfics/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <functional>
#include <mutex>
#include <thread>

#include "perfics/errors.hpp"
#include "perfics/judge.hpp"
#include "perfics/refinement.hpp"
#include "perfics/transcript.hpp"

namespace perfics {

RunPlan make_plan(const HarnessConfig& config, const Benchmark& bench,
                  int iterations) {
  if (iterations < 1) throw UsageError("--iterations must be >= 1");
  RunPlan plan;
  plan.control = config.control().name;
  plan.oracle = config.oracle().name;
  for (const ModelProfile* m : config.candidates()) plan.candidates.push_back(m->name);
  if (plan.candidates.empty()) throw ConfigError("no candidate models configured");
  plan.prompts = bench.prompts;
  plan.iterations = iterations;
  return plan;
}

std::vector<WorkUnit> generation_units(const RunPlan& plan) {
  std::vector<WorkUnit> out;
  for (const auto& p : plan.prompts) {
    out.push_back({EventKind::kZeroShot, plan.control, p.id, 0, {}, {}});
  }
  for (const auto& m : plan.candidates) {
    for (const auto& p : plan.prompts) {
      out.push_back({EventKind::kZeroShot, m, p.id, 0, {}, {}});
      for (int k = 0; k < plan.iterations; ++k) {
        out.push_back({EventKind::kCritique, m, p.id, k, {}, {}});
        out.push_back({EventKind::kRefine, m, p.id, k, {}, {}});
      }
    }
  }
  return out;
}

std::vector<WorkUnit> judgment_units(const RunPlan& plan) {
  std::vector<WorkUnit> out;
  for (const auto& m : plan.candidates) {
    for (Variant v : {Variant::kZeroShot, Variant::kRefined}) {
      for (const auto& p : plan.prompts) {
        for (Ordering o : {Ordering::kModelFirst, Ordering::kControlFirst}) {
          out.push_back({EventKind::kJudgment, m, p.id, 0, v, o});
        }
      }
    }
  }
  return out;
}

std::vector<WorkUnit> full_plan(const RunPlan& plan) {
  auto out = generation_units(plan);
  auto judged = judgment_units(plan);
  out.insert(out.end(), judged.begin(), judged.end());
  return out;
}

namespace {

void merge(StageReport& into, const BatchOutcome& b) {
  into.failed += b.failed;
  into.failures.insert(into.failures.end(), b.failures.begin(), b.failures.end());
}

}  // namespace

StageReport run_generation(RunStore& store, Gateway& gateway,
                           const HarnessConfig& config, const RunPlan& plan,
                           int workers) {
  const auto units = generation_units(plan);
  const auto before = pending_work(store, units).size();
  StageReport report;
  report.skipped = static_cast<int>(units.size() - before);

  RefinementEngine engine(gateway, config.prompts, config.generation, &store);
  merge(report, run_control_batch(engine, plan.control, plan.prompts, workers));
  merge(report, run_refinement_batch(engine, plan.candidates, plan.prompts,
                                     plan.iterations, workers));
  const auto after = pending_work(store, units).size();
  report.completed = static_cast<int>(before - after);
  return report;
}

StageReport run_judging(RunStore& store, Gateway& gateway,
                        const HarnessConfig& config, const RunPlan& plan,
                        int workers) {
  const auto units = judgment_units(plan);
  const auto pending = pending_work(store, units);
  StageReport report;
  report.skipped = static_cast<int>(units.size() - pending.size());

  const auto transcripts = transcripts_from_events(store.events(), config.generation);
  std::map<std::string, const TaskPrompt*> prompts;
  for (const auto& p : plan.prompts) prompts[p.id] = &p;

  OracleJudge judge(gateway, plan.oracle, config.prompts, config.oracle_generation,
                    &store);
  std::mutex mu;
  auto fail = [&](const WorkUnit& u, const std::string& msg) {
    std::lock_guard lock(mu);
    ++report.failed;
    report.failures.push_back(u.model + "/" + u.prompt_id + "/" +
                              std::string(to_string(*u.variant)) + "/" +
                              std::string(to_string(*u.ordering)) + ": " + msg);
  };

  run_in_log_order(&store, pending.size(), workers, [&](std::size_t i) {
    const WorkUnit& u = pending[i];
    auto control = transcripts.find({plan.control, u.prompt_id});
    if (control == transcripts.end() || control->second.usage.empty()) {
      fail(u, "control answer missing");
      return;
    }
    auto cand = transcripts.find({u.model, u.prompt_id});
    const std::string* answer = nullptr;
    if (cand != transcripts.end()) {
      const RefinementTranscript& t = cand->second;
      if (*u.variant == Variant::kZeroShot && !t.usage.empty()) {
        answer = &t.y0;
      } else if (*u.variant == Variant::kRefined && t.complete(plan.iterations)) {
        answer = &t.rounds.back().refined;
      }
    }
    if (answer == nullptr) {
      fail(u, "candidate answer missing");
      return;
    }
    try {
      judge.judge_ordered(*prompts.at(u.prompt_id), *answer, control->second.y0,
                          *u.ordering, {u.model, *u.variant});
      std::lock_guard lock(mu);
      ++report.completed;
    } catch (const JudgmentParseError&) {
      // Stored raw; the unit is done even though its score is unusable.
      std::lock_guard lock(mu);
      ++report.completed;
    } catch (const ScoreOutOfRange&) {
      std::lock_guard lock(mu);
      ++report.completed;
    } catch (const std::exception& e) {
      fail(u, e.what());
    }
  });
  return report;
}

std::vector<ModelReport> score_run(const std::vector<RunEvent>& events,
                                   const Benchmark& bench,
                                   const std::vector<std::string>& candidates,
                                   const WeightVector& weights,
                                   const GenerationParams& params) {
  const auto transcripts = transcripts_from_events(events, params);
  std::vector<ModelReport> out;
  for (const auto& model : candidates) {
    ModelReport r;
    r.model = model;
    std::map<std::string, CategoryScore> cells[2];
    for (Variant v : {Variant::kZeroShot, Variant::kRefined}) {
      const bool refined = v == Variant::kRefined;
      const ScoreCollection coll = collect_debiased_scores(events, model, v);
      for (const auto& id : coll.excluded) {
        r.excluded.push_back(std::string(to_string(v)) + "/" + id);
      }
      ScoreRow& row = refined ? r.refined : r.zero_shot;
      for (const auto& cat : bench.categories) {
        try {
          CategoryScore s = category_relative_mean(coll.scores, bench, cat.name, v);
          row.emplace_back(cat.name, s.mean_relative_pct);
          (refined ? r.n_refined : r.n_zero_shot)[cat.name] = s.n;
          cells[refined ? 1 : 0][cat.name] = s;
        } catch (const EmptyCategory&) {
        }
      }
      if (row.empty()) continue;
      (refined ? r.eq_refined : r.eq_zero_shot) = equal_weight_mean(row);
      try {
        (refined ? r.weighted_refined : r.weighted_zero_shot) = weighted_mean(row, weights);
      } catch (const MissingWeight& e) {
        spdlog::warn("{}: {}", model, e.what());
      }
      (refined ? r.win_rate_refined : r.win_rate_zero_shot) = win_rate(coll.scores);
    }
    std::map<TranscriptKey, RefinementTranscript> mine;
    for (const auto& [key, t] : transcripts) {
      if (key.first == model) mine.emplace(key, t);
    }
    for (const auto& cat : bench.categories) {
      auto z = cells[0].find(cat.name);
      auto f = cells[1].find(cat.name);
      if (z != cells[0].end() && f != cells[1].end()) {
        r.deltas.push_back(domain_delta(z->second, f->second));
      }
      try {
        r.token_change_pct[cat.name] = token_change(mine, bench, cat.name);
      } catch (const ZeroBaselineTokens&) {
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

CategoryPerformance to_performance(const ModelReport& report) {
  CategoryPerformance p;
  p.model = report.model;
  for (const auto& [cat, v] : report.zero_shot) p.zero_shot[cat] = v;
  for (const auto& [cat, v] : report.refined) p.refined[cat] = v;
  return p;
}

}  // namespace perfics
