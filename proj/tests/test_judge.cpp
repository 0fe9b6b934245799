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

#include <cmath>
#include <random>

#include "perfics/errors.hpp"
#include "perfics/judge.hpp"
#include "support/fakes.hpp"

namespace perfics {
namespace {

using testing::ScriptedBackend;
using testing::TempDir;

TEST(RenderEval, SwapChangesOnlyBlockOrder) {
  const auto p = PromptSet::defaults();
  const auto ab = render_eval_prompt("Q?", "alpha", "beta", p);
  const auto ba = render_eval_prompt("Q?", "beta", "alpha", p);
  EXPECT_NE(ab.text, ba.text);
  EXPECT_EQ(ab.text.size(), ba.text.size());
  EXPECT_LT(ab.text.find("alpha"), ab.text.find("beta"));
  EXPECT_LT(ba.text.find("beta"), ba.text.find("alpha"));
  EXPECT_EQ(ab.text.find("[Question]\nQ?"), 0u);
  EXPECT_NE(ab.text.find(p.eval), std::string::npos);
  EXPECT_FALSE(ab.empty_slot);
}

TEST(RenderEval, EmptySlotKeepsBlock) {
  const auto r = render_eval_prompt("Q?", "", "beta", PromptSet::defaults());
  EXPECT_TRUE(r.empty_slot);
  EXPECT_NE(r.text.find("[The Start of Assistant 1's Answer]\n\n"), std::string::npos);
}

TEST(ParseJudgment, IntegersWithExplanation) {
  const auto j = parse_judgment("7 8\nAssistant 2 was more detailed.");
  EXPECT_EQ(j.score_first, 7.0);
  EXPECT_EQ(j.score_second, 8.0);
  EXPECT_EQ(j.explanation, "Assistant 2 was more detailed.");
  EXPECT_FALSE(j.lenient);
}

TEST(ParseJudgment, Decimals) {
  const auto j = parse_judgment("9.5 9\nok");
  EXPECT_EQ(j.score_first, 9.5);
  EXPECT_EQ(j.score_second, 9.0);
}

TEST(ParseJudgment, LeadingBlankLinesAndPadding) {
  const auto j = parse_judgment("\n  \n\t 6   4 \r\n\n  reason  \n");
  EXPECT_EQ(j.score_first, 6.0);
  EXPECT_EQ(j.score_second, 4.0);
  EXPECT_EQ(j.explanation, "reason");
}

TEST(ParseJudgment, CommaIsLenient) {
  const auto j = parse_judgment("8,7\nfine");
  EXPECT_EQ(j.score_first, 8.0);
  EXPECT_EQ(j.score_second, 7.0);
  EXPECT_TRUE(j.lenient);
  EXPECT_TRUE(parse_judgment("8, 7").lenient);
}

TEST(ParseJudgment, ProseIsParseErrorWithRaw) {
  const std::string raw = "The scores are 7 and 8";
  try {
    parse_judgment(raw);
    FAIL() << "expected JudgmentParseError";
  } catch (const JudgmentParseError& e) {
    EXPECT_EQ(e.raw(), raw);
  }
  EXPECT_THROW(parse_judgment(""), JudgmentParseError);
  EXPECT_THROW(parse_judgment("7\n8"), JudgmentParseError);
  EXPECT_THROW(parse_judgment("7 8 9"), JudgmentParseError);
  EXPECT_THROW(parse_judgment("7/10 8/10"), JudgmentParseError);
  EXPECT_THROW(parse_judgment("1e1 2"), JudgmentParseError);
}

TEST(ParseJudgment, OutOfRange) {
  EXPECT_THROW(parse_judgment("11 3\nx"), ScoreOutOfRange);
  EXPECT_THROW(parse_judgment("-1 3"), ScoreOutOfRange);
  EXPECT_THROW(parse_judgment("3 10.01"), ScoreOutOfRange);
  EXPECT_NO_THROW(parse_judgment("0 10"));
}

// Every well-formed pair is read back exactly; arbitrary bytes never escape
// as anything but the two typed errors.
TEST(ParseJudgment, RandomizedRoundTripAndFuzz) {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<int> tenths(0, 100);
  for (int i = 0; i < 5000; ++i) {
    const int a = tenths(rng);
    const int b = tenths(rng);
    const std::string line = std::to_string(a / 10) + "." + std::to_string(a % 10) +
                             " " + std::to_string(b / 10) + "." +
                             std::to_string(b % 10) + "\nwhy";
    const auto j = parse_judgment(line);
    EXPECT_EQ(j.score_first, std::stod(line.substr(0, line.find(' '))));
    EXPECT_DOUBLE_EQ(j.score_first, a / 10.0);
    EXPECT_DOUBLE_EQ(j.score_second, b / 10.0);
  }
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> len(0, 40);
  for (int i = 0; i < 20000; ++i) {
    std::string s(len(rng), '\0');
    for (auto& c : s) c = static_cast<char>(byte(rng));
    try {
      const auto j = parse_judgment(s);
      EXPECT_GE(j.score_first, 0.0);
      EXPECT_LE(j.score_second, 10.0);
    } catch (const JudgmentParseError&) {
    } catch (const ScoreOutOfRange&) {
    }
  }
}

TEST(RelativeScore, Definition) {
  EXPECT_NEAR(relative_score(8, 7), 1.142857142857, 1e-12);
  EXPECT_EQ(relative_score(7, 7), 1.0);
  EXPECT_EQ(relative_score(0, 7), 0.0);
  EXPECT_THROW(relative_score(5, 0), ZeroControlScore);
}

PairwiseJudgment pj(Ordering o, double first, double second) {
  ParsedJudgment p;
  p.score_first = first;
  p.score_second = second;
  return make_judgment("q", o, p);
}

TEST(Combine, DebiasedMeanOfOrderings) {
  const auto d = combine_orderings("q", pj(Ordering::kModelFirst, 8, 7),
                                   pj(Ordering::kControlFirst, 8, 7));
  EXPECT_DOUBLE_EQ(*d.s_r_ab, 8.0 / 7.0);
  EXPECT_DOUBLE_EQ(*d.s_r_ba, 7.0 / 8.0);
  EXPECT_DOUBLE_EQ(d.s_r, (8.0 / 7.0 + 7.0 / 8.0) / 2.0);
  EXPECT_NEAR(d.s_r, 1.0089, 5e-5);
  EXPECT_FALSE(d.partial);
}

TEST(Combine, SymmetricScoresGiveOne) {
  const auto d = combine_orderings("q", pj(Ordering::kModelFirst, 7, 7),
                                   pj(Ordering::kControlFirst, 7, 7));
  EXPECT_EQ(d.s_r, 1.0);
}

TEST(Combine, ArgumentOrderDoesNotMatter) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> s(1, 10);
  for (int i = 0; i < 200; ++i) {
    const auto a = pj(Ordering::kModelFirst, s(rng), s(rng));
    const auto b = pj(Ordering::kControlFirst, s(rng), s(rng));
    const auto x = combine_orderings("q", a, b);
    const double oracle = (a.score_first / a.score_second +
                           b.score_second / b.score_first) / 2.0;
    EXPECT_NEAR(x.s_r, oracle, 1e-15);
  }
}

TEST(Combine, PartialAndUnavailable) {
  const auto d = combine_orderings("q", std::nullopt, pj(Ordering::kControlFirst, 4, 6));
  EXPECT_TRUE(d.partial);
  EXPECT_DOUBLE_EQ(d.s_r, 1.5);
  EXPECT_FALSE(d.s_r_ab.has_value());
  EXPECT_THROW(combine_orderings("q", std::nullopt, std::nullopt), JudgmentUnavailable);
  // A zero control score makes that ordering unusable.
  const auto z = combine_orderings("q", pj(Ordering::kModelFirst, 5, 0),
                                   pj(Ordering::kControlFirst, 5, 5));
  EXPECT_TRUE(z.partial);
  EXPECT_EQ(z.s_r, 1.0);
  EXPECT_THROW(combine_orderings("q", pj(Ordering::kModelFirst, 5, 0), std::nullopt),
               JudgmentUnavailable);
}

TEST(MakeJudgment, LabelsFollowOrdering) {
  const auto a = pj(Ordering::kModelFirst, 8, 7);
  EXPECT_EQ(a.s_m(), 8);
  EXPECT_EQ(a.s_c(), 7);
  const auto b = pj(Ordering::kControlFirst, 8, 7);
  EXPECT_EQ(b.s_m(), 7);
  EXPECT_EQ(b.s_c(), 8);
}

struct JudgeFixture {
  TempDir dir;
  RunStore store = RunStore::create(dir.path(), "r", {}, false);
  Gateway gateway{RetryPolicy{1, 1, 2}, testing::no_sleep()};
  std::shared_ptr<ScriptedBackend> oracle;
  explicit JudgeFixture(ScriptedBackend::Script s)
      : oracle(std::make_shared<ScriptedBackend>(std::move(s))) {
    gateway.register_backend("gpt-4", oracle);
  }
  OracleJudge judge() {
    return OracleJudge(gateway, "gpt-4", PromptSet::defaults(),
                       GenerationParams::oracle_defaults(), &store);
  }
};

const TaskPrompt kPrompt{"q1", "writing", "Write a haiku.", 0};

TEST(OracleJudge, FixedAnswerIsRelabeledPerOrdering) {
  JudgeFixture f([](const CompletionRequest&) { return std::string("8 7\nreasons"); });
  auto judge = f.judge();
  const JudgeSubject who{"Vicuna-7B", Variant::kRefined};
  const auto a = judge.judge_ordered(kPrompt, "mine", "theirs", Ordering::kModelFirst, who);
  EXPECT_EQ(a.s_m(), 8);
  EXPECT_EQ(a.s_c(), 7);
  const auto b = judge.judge_ordered(kPrompt, "mine", "theirs", Ordering::kControlFirst, who);
  EXPECT_EQ(b.s_m(), 7);
  EXPECT_EQ(b.s_c(), 8);

  const auto reqs = f.oracle->requests();
  ASSERT_EQ(reqs.size(), 2u);
  EXPECT_LT(reqs[0].user_content.find("mine"), reqs[0].user_content.find("theirs"));
  EXPECT_GT(reqs[1].user_content.find("mine"), reqs[1].user_content.find("theirs"));
  EXPECT_EQ(reqs[0].params.temperature, 0.0);

  const auto events = f.store.events();
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0].kind, EventKind::kJudgment);
  EXPECT_EQ(events[0].model, "Vicuna-7B");
  EXPECT_EQ(events[0].backend_model, "gpt-4");
  EXPECT_EQ(events[0].variant, Variant::kRefined);
  EXPECT_EQ(events[1].ordering, Ordering::kControlFirst);
  EXPECT_EQ(events[1].content, "8 7\nreasons");
}

TEST(OracleJudge, ContentAwareOracleIsOrderInvariant) {
  // Scores the answer text rather than the slot.
  JudgeFixture f([](const CompletionRequest& r) {
    const auto& u = r.user_content;
    return std::string(u.find("mine") < u.find("theirs") ? "9 6" : "6 9");
  });
  auto judge = f.judge();
  const auto d = judge.judge_debiased(kPrompt, "mine", "theirs");
  EXPECT_DOUBLE_EQ(d.s_r, 1.5);
  EXPECT_DOUBLE_EQ(*d.s_r_ab, *d.s_r_ba);
  EXPECT_EQ(d.s_m, 9);
  EXPECT_EQ(d.s_c, 6);
}

TEST(OracleJudge, UnparseableAnswerLeavesFailureEvent) {
  JudgeFixture f([](const CompletionRequest& r) {
    const auto& u = r.user_content;
    return std::string(u.find("mine") < u.find("theirs") ? "I cannot decide" : "6 9");
  });
  auto judge = f.judge();
  EXPECT_THROW(judge.judge_ordered(kPrompt, "mine", "theirs", Ordering::kModelFirst),
               JudgmentParseError);
  const auto d = judge.judge_debiased(kPrompt, "mine", "theirs");
  EXPECT_TRUE(d.partial);
  EXPECT_DOUBLE_EQ(d.s_r, 1.5);
  int failures = 0;
  int raw = 0;
  for (const auto& e : f.store.events()) {
    if (e.kind == EventKind::kFailure) {
      ++failures;
      EXPECT_EQ(e.phase, "judgment");
      EXPECT_EQ(e.content.rfind("JudgmentParseError", 0), 0u);
    }
    if (e.kind == EventKind::kJudgment && e.content == "I cannot decide") ++raw;
  }
  EXPECT_EQ(failures, 2);
  EXPECT_EQ(raw, 2);
}

TEST(OracleJudge, BothOrderingsFailing) {
  JudgeFixture f([](const CompletionRequest&) { return std::string("12 3"); });
  auto judge = f.judge();
  EXPECT_THROW(judge.judge_debiased(kPrompt, "a", "b"), JudgmentUnavailable);
}

TEST(OracleJudge, GatewayErrorPropagates) {
  JudgeFixture f([](const CompletionRequest&) -> std::string {
    throw BackendError(401, "denied");
  });
  auto judge = f.judge();
  EXPECT_THROW(judge.judge_debiased(kPrompt, "a", "b"), BackendError);
  const auto events = f.store.events();
  ASSERT_EQ(events.size(), 1u);
  EXPECT_EQ(events[0].kind, EventKind::kFailure);
}

}  // namespace
}  // namespace perfics
