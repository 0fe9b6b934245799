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

#ifndef PERFICS_JUDGE_HPP_
#define PERFICS_JUDGE_HPP_

#include <optional>
#include <string>
#include <string_view>

#include "perfics/gateway.hpp"
#include "perfics/run_store.hpp"
#include "perfics/types.hpp"

namespace perfics {

struct RenderedEval {
  std::string text;
  // One of the assistant slots had an empty body.
  bool empty_slot = false;
};

// Question, then the two answers in the given order, then I_eval verbatim.
RenderedEval render_eval_prompt(std::string_view question,
                                std::string_view response_1,
                                std::string_view response_2,
                                const PromptSet& prompts);

struct ParsedJudgment {
  double score_first = 0.0;
  double score_second = 0.0;
  std::string explanation;
  std::string raw_first_line;
  // Scores were comma-separated rather than space-separated.
  bool lenient = false;
};

// The first nonblank line must hold exactly two plain decimal numbers
// ("7 8", "9.5 9", or leniently "7, 8"); everything after it is the
// explanation. Throws JudgmentParseError or ScoreOutOfRange (outside [0, 10]).
ParsedJudgment parse_judgment(std::string_view raw);

// s_m / s_c. Throws ZeroControlScore when s_c == 0.
double relative_score(double s_m, double s_c);

struct PairwiseJudgment {
  std::string prompt_id;
  Ordering ordering = Ordering::kModelFirst;
  double score_first = 0.0;
  double score_second = 0.0;
  std::string explanation;
  std::string raw_first_line;
  bool lenient = false;

  bool model_first() const { return ordering == Ordering::kModelFirst; }
  double s_m() const { return model_first() ? score_first : score_second; }
  double s_c() const { return model_first() ? score_second : score_first; }
};

PairwiseJudgment make_judgment(std::string prompt_id, Ordering ordering,
                               const ParsedJudgment& parsed);

struct DebiasedScore {
  std::string prompt_id;
  // Mean model and control scores over the usable orderings.
  double s_m = 0.0;
  double s_c = 0.0;
  std::optional<double> s_r_ab;  // model shown first
  std::optional<double> s_r_ba;  // control shown first
  double s_r = 0.0;
  bool partial = false;
};

// Averages the per-ordering relative scores. An ordering that is missing or
// has a zero control score is skipped with a warning and the result is
// flagged partial; with no usable ordering, throws JudgmentUnavailable.
DebiasedScore combine_orderings(const std::string& prompt_id,
                                const std::optional<PairwiseJudgment>& model_first,
                                const std::optional<PairwiseJudgment>& control_first);

// What a judgment is about: a candidate's zero-shot or refined answer.
struct JudgeSubject {
  std::string candidate;
  Variant variant = Variant::kZeroShot;
};

class OracleJudge {
 public:
  OracleJudge(Gateway& gateway, std::string oracle_model, PromptSet prompts,
              GenerationParams params, RunStore* store = nullptr);

  // Gateway errors are logged as failure events and rethrown. An unparseable
  // answer is logged (raw judgment event plus failure event) and rethrown as
  // JudgmentParseError or ScoreOutOfRange.
  PairwiseJudgment judge_ordered(const TaskPrompt& prompt,
                                 std::string_view y_model,
                                 std::string_view y_control, Ordering ordering,
                                 const JudgeSubject& subject = {});

  // Both orderings, then combine_orderings. Parse failures in one ordering
  // leave a partial score; gateway errors propagate.
  DebiasedScore judge_debiased(const TaskPrompt& prompt,
                               std::string_view y_model,
                               std::string_view y_control,
                               const JudgeSubject& subject = {});

  const std::string& oracle_model() const { return oracle_; }

 private:
  Gateway& gateway_;
  std::string oracle_;
  PromptSet prompts_;
  GenerationParams params_;
  RunStore* store_;
};

}  // namespace perfics

#endif  // PERFICS_JUDGE_HPP_
