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

#include <chrono>
#include <fstream>
#include <random>
#include <thread>

#include "perfics/errors.hpp"
#include "perfics/run_store.hpp"
#include "support/fakes.hpp"

namespace perfics {
namespace {

using testing::TempDir;

RunEvent gen_event(std::string model, std::string prompt, EventKind kind,
                   int round = 0) {
  RunEvent e;
  e.kind = kind;
  e.model = std::move(model);
  e.backend_model = e.model;
  e.prompt_id = std::move(prompt);
  e.round = round;
  e.content = "text for " + e.prompt_id;
  e.usage = {12, 34, false};
  return e;
}

RunEvent judgment(std::string cand, std::string prompt, Ordering o, Variant v) {
  RunEvent e = gen_event(std::move(cand), std::move(prompt), EventKind::kJudgment);
  e.backend_model = "oracle";
  e.ordering = o;
  e.variant = v;
  e.content = "7 8\nok";
  return e;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(RunEvent, JsonRoundTrip) {
  RunEvent e = judgment("Vicuna-7B", "q1", Ordering::kControlFirst, Variant::kRefined);
  e.run_id = "r";
  e.seq = 9;
  e.timestamp = "2024-01-01T00:00:00.000Z";
  e.content = "multi\nline \"quoted\" \xc3\xa9";
  EXPECT_EQ(RunEvent::from_json(e.to_json()), e);
  RunEvent f = gen_event("m", "q", EventKind::kFailure);
  f.phase = "critique";
  f.empty_response = true;
  EXPECT_EQ(RunEvent::from_json(f.to_json()), f);
}

TEST(RunStore, PersistsAcrossReopen) {
  TempDir dir;
  {
    auto store = RunStore::create(dir.path(), "run-1", {{"k", 1}}, false);
    EXPECT_EQ(store.record(gen_event("m", "q1", EventKind::kZeroShot)), 1);
    EXPECT_EQ(store.record(gen_event("m", "q1", EventKind::kCritique)), 2);
  }
  auto store = RunStore::open(dir.path(), false);
  EXPECT_EQ(store.run_id(), "run-1");
  EXPECT_EQ(store.manifest().at("config").at("k"), 1);
  ASSERT_EQ(store.events().size(), 2u);
  EXPECT_EQ(store.events()[1].kind, EventKind::kCritique);
  EXPECT_EQ(store.record(gen_event("m", "q1", EventKind::kRefine)), 3);
  EXPECT_THROW(RunStore::create(dir.path(), "run-1", {}, false), StorageError);
}

TEST(RunStore, SequenceMustIncrease) {
  TempDir dir;
  auto store = RunStore::create(dir.path(), "r", {}, false);
  RunEvent e = gen_event("m", "q", EventKind::kZeroShot);
  e.run_id = "r";
  e.seq = 5;
  store.append_event(e);
  e.seq = 5;
  EXPECT_THROW(store.append_event(e), SequenceRegression);
  e.seq = 4;
  EXPECT_THROW(store.append_event(e), SequenceRegression);
  e.seq = 6;
  EXPECT_EQ(store.append_event(e), 6);
}

TEST(RunStore, TornFinalLineIsDroppedAndTruncated) {
  TempDir dir;
  {
    auto store = RunStore::create(dir.path(), "r", {}, false);
    store.record(gen_event("m", "q1", EventKind::kZeroShot));
    store.record(gen_event("m", "q2", EventKind::kZeroShot));
  }
  const auto path = dir / "events.jsonl";
  const std::string good = slurp(path);
  std::ofstream(path, std::ios::app) << good.substr(0, good.size() / 3);
  auto store = RunStore::open(dir.path(), false);
  EXPECT_EQ(store.events().size(), 2u);
  EXPECT_EQ(slurp(path), good);
  store.record(gen_event("m", "q3", EventKind::kZeroShot));
  EXPECT_EQ(RunStore::open(dir.path(), false).events().size(), 3u);
}

TEST(RunStore, InteriorDamageIsCorruptLog) {
  TempDir dir;
  {
    auto store = RunStore::create(dir.path(), "r", {}, false);
    for (int i = 0; i < 3; ++i) {
      store.record(gen_event("m", "q" + std::to_string(i), EventKind::kZeroShot));
    }
  }
  const auto path = dir / "events.jsonl";
  std::string data = slurp(path);
  data.replace(data.find("text for q1"), 11, "text for qX");
  std::ofstream(path, std::ios::trunc | std::ios::binary) << data;
  EXPECT_THROW(RunStore::open(dir.path(), false), CorruptLog);
}

TEST(RunStore, ForeignRunIdIsCorruptLog) {
  TempDir a;
  TempDir b;
  {
    auto s = RunStore::create(a.path(), "a", {}, false);
    s.record(gen_event("m", "q", EventKind::kZeroShot));
  }
  { auto s = RunStore::create(b.path(), "b", {}, false); }
  std::filesystem::copy_file(a / "events.jsonl", b / "events.jsonl",
                             std::filesystem::copy_options::overwrite_existing);
  EXPECT_THROW(RunStore::open(b.path(), false), CorruptLog);
}

TEST(RunStore, ConcurrentAppendsConserveEvents) {
  TempDir dir;
  constexpr int kThreads = 8;
  constexpr int kPerThread = 1250;
  {
    auto store = RunStore::create(dir.path(), "r", {}, false);
    std::vector<std::jthread> pool;
    for (int t = 0; t < kThreads; ++t) {
      pool.emplace_back([&store, t] {
        for (int i = 0; i < kPerThread; ++i) {
          store.record(gen_event("m" + std::to_string(t), "q" + std::to_string(i),
                                 EventKind::kZeroShot));
        }
      });
    }
  }
  const auto log = read_event_log(dir / "events.jsonl");
  ASSERT_EQ(log.events.size(), static_cast<std::size_t>(kThreads * kPerThread));
  EXPECT_FALSE(log.dropped_tail);
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    EXPECT_EQ(log.events[i].seq, static_cast<std::int64_t>(i + 1));
  }
  auto reopened = RunStore::open(dir.path(), false);
  EXPECT_EQ(reopened.completed_keys().size(),
            static_cast<std::size_t>(kThreads * kPerThread));
}

// Task i records i % 3 + 1 events after a jittered delay; the log must come
// out in task order whatever the scheduling.
std::vector<std::string> ordered_run(int workers, std::uint32_t seed) {
  TempDir dir;
  auto store = RunStore::create(dir.path(), "r", {}, false);
  constexpr std::size_t kTasks = 60;
  std::vector<int> delay_us(kTasks);
  std::mt19937 rng(seed);
  for (auto& d : delay_us) d = static_cast<int>(rng() % 400);
  run_in_log_order(&store, kTasks, workers, [&](std::size_t i) {
    std::this_thread::sleep_for(std::chrono::microseconds(delay_us[i]));
    for (std::size_t k = 0; k <= i % 3; ++k) {
      store.record(gen_event("m", "q" + std::to_string(i) + "." + std::to_string(k),
                             EventKind::kZeroShot));
    }
  });
  std::vector<std::string> ids;
  for (const auto& e : store.events()) ids.push_back(e.prompt_id);
  return ids;
}

TEST(RunInLogOrder, ParallelLogMatchesSequential) {
  const auto sequential = ordered_run(1, 1);
  ASSERT_EQ(sequential.size(), 120u);
  EXPECT_EQ(sequential.front(), "q0.0");
  for (std::uint32_t seed = 2; seed < 6; ++seed) {
    EXPECT_EQ(ordered_run(6, seed), sequential) << "seed " << seed;
  }
}

TEST(RunInLogOrder, AllTasksRunAndLowestFailureIsRethrown) {
  for (int workers : {1, 4}) {
    TempDir dir;
    auto store = RunStore::create(dir.path(), "r", {}, false);
    try {
      run_in_log_order(&store, 10, workers, [&](std::size_t i) {
        if (i == 3 || i == 7) throw StorageError("task " + std::to_string(i));
        store.record(gen_event("m", "q" + std::to_string(i), EventKind::kZeroShot));
      });
      ADD_FAILURE() << "no exception, workers " << workers;
    } catch (const StorageError& e) {
      EXPECT_STREQ(e.what(), "task 3");
    }
    std::vector<std::string> ids;
    for (const auto& e : store.events()) ids.push_back(e.prompt_id);
    EXPECT_EQ(ids, (std::vector<std::string>{"q0", "q1", "q2", "q4", "q5", "q6", "q8", "q9"}))
        << "workers " << workers;
  }
}

TEST(WorkUnit, KeyDistinguishesJudgmentSlots) {
  const auto a = WorkUnit::of(judgment("c", "q", Ordering::kModelFirst, Variant::kZeroShot));
  const auto b = WorkUnit::of(judgment("c", "q", Ordering::kControlFirst, Variant::kZeroShot));
  const auto c = WorkUnit::of(judgment("c", "q", Ordering::kModelFirst, Variant::kRefined));
  EXPECT_NE(a.key(), b.key());
  EXPECT_NE(a.key(), c.key());
  const auto g0 = WorkUnit::of(gen_event("c", "q", EventKind::kCritique, 0));
  const auto g1 = WorkUnit::of(gen_event("c", "q", EventKind::kCritique, 1));
  EXPECT_NE(g0.key(), g1.key());
}

TEST(RunStore, PendingWorkSkipsCompletedButNotFailed) {
  TempDir dir;
  auto store = RunStore::create(dir.path(), "r", {}, false);
  store.record(gen_event("m", "q1", EventKind::kZeroShot));
  store.record(gen_event("m", "q2", EventKind::kFailure));
  std::vector<WorkUnit> plan;
  for (const char* q : {"q1", "q2", "q3"}) {
    WorkUnit u;
    u.model = "m";
    u.prompt_id = q;
    plan.push_back(u);
  }
  const auto pending = pending_work(store, plan);
  ASSERT_EQ(pending.size(), 2u);
  EXPECT_EQ(pending[0].prompt_id, "q2");
  EXPECT_EQ(pending[1].prompt_id, "q3");
}

TEST(CostSummary, SplitsCandidatesAndOracle) {
  std::vector<RunEvent> events;
  events.push_back(gen_event("gpt-3.5-turbo", "q", EventKind::kZeroShot));
  events.push_back(gen_event("gpt-3.5-turbo", "q2", EventKind::kZeroShot));
  events.push_back(judgment("Vicuna-7B", "q", Ordering::kModelFirst, Variant::kZeroShot));
  events.push_back(gen_event("Vicuna-7B", "q", EventKind::kFailure));
  const auto ledger = cost_summary(
      events, {{"gpt-3.5-turbo", {1.0, 2.0}}, {"oracle", {10.0, 20.0}}});
  ASSERT_EQ(ledger.models.size(), 1u);
  const auto& turbo = ledger.models.at("gpt-3.5-turbo");
  EXPECT_EQ(turbo.call_count, 2);
  EXPECT_EQ(turbo.prompt_tokens, 24);
  EXPECT_EQ(turbo.completion_tokens, 68);
  EXPECT_DOUBLE_EQ(turbo.estimated_cost, (24 * 1.0 + 68 * 2.0) / 1000.0);
  const auto& oracle = ledger.oracles.at("oracle");
  EXPECT_EQ(oracle.call_count, 1);
  EXPECT_DOUBLE_EQ(oracle.estimated_cost, (12 * 10.0 + 34 * 20.0) / 1000.0);
  EXPECT_DOUBLE_EQ(ledger.estimated_cost,
                   turbo.estimated_cost + oracle.estimated_cost);
}

TEST(CostSummary, UsageIsConservedUnderRandomEvents) {
  std::mt19937 rng(7);
  std::vector<RunEvent> events;
  std::int64_t prompt_sum = 0;
  std::int64_t completion_sum = 0;
  for (int i = 0; i < 500; ++i) {
    RunEvent e = gen_event("m" + std::to_string(rng() % 4), "q",
                           static_cast<EventKind>(rng() % 5));
    e.usage = {static_cast<int>(rng() % 1000), static_cast<int>(rng() % 1000), false};
    if (e.kind != EventKind::kFailure) {
      prompt_sum += e.usage.prompt_tokens;
      completion_sum += e.usage.completion_tokens;
    }
    events.push_back(e);
  }
  const auto ledger = cost_summary(events, {});
  std::int64_t p = 0;
  std::int64_t c = 0;
  for (const auto* side : {&ledger.models, &ledger.oracles}) {
    for (const auto& [_, t] : *side) {
      p += t.prompt_tokens;
      c += t.completion_tokens;
    }
  }
  EXPECT_EQ(p, prompt_sum);
  EXPECT_EQ(c, completion_sum);
  EXPECT_DOUBLE_EQ(ledger.estimated_cost, 0.0);
}

}  // namespace
}  // namespace perfics
