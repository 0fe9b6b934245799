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

#include "perfics/judge.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <charconv>
#include <vector>

#include "perfics/errors.hpp"

namespace perfics {

RenderedEval render_eval_prompt(std::string_view question,
                                std::string_view response_1,
                                std::string_view response_2,
                                const PromptSet& prompts) {
  RenderedEval out;
  out.empty_slot = response_1.empty() || response_2.empty();
  std::string& t = out.text;
  t += "[Question]\n";
  t += question;
  t += "\n\n[The Start of Assistant 1's Answer]\n";
  t += response_1;
  t += "\n\n[The End of Assistant 1's Answer]\n\n";
  t += "[The Start of Assistant 2's Answer]\n";
  t += response_2;
  t += "\n\n[The End of Assistant 2's Answer]\n\n[System]\n";
  t += prompts.eval;
  t += '\n';
  return out;
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// [+-]? digits ('.' digits?)? | [+-]? '.' digits
bool is_plain_number(std::string_view tok) {
  std::size_t i = 0;
  if (i < tok.size() && (tok[i] == '+' || tok[i] == '-')) ++i;
  bool digits = false;
  bool dot = false;
  for (; i < tok.size(); ++i) {
    const char c = tok[i];
    if (c >= '0' && c <= '9') {
      digits = true;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digits;
}

double to_score(std::string_view tok, std::string_view raw) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec == std::errc::result_out_of_range) {
    throw ScoreOutOfRange("score '" + std::string(tok) + "' is out of range");
  }
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw JudgmentParseError(std::string(raw),
                             "cannot read score '" + std::string(tok) + "'");
  }
  if (!(value >= 0.0 && value <= 10.0)) {
    throw ScoreOutOfRange("score " + std::string(tok) + " outside [0, 10]");
  }
  return value;
}

}  // namespace

ParsedJudgment parse_judgment(std::string_view raw) {
  std::size_t pos = 0;
  std::string_view line;
  std::size_t next = std::string_view::npos;
  for (;;) {
    if (pos >= raw.size()) {
      throw JudgmentParseError(std::string(raw), "no score line");
    }
    const std::size_t nl = raw.find('\n', pos);
    line = raw.substr(pos, nl == std::string_view::npos ? raw.size() - pos
                                                       : nl - pos);
    next = nl == std::string_view::npos ? raw.size() : nl + 1;
    if (!trim(line).empty()) break;
    pos = next;
  }
  line = trim(line);

  ParsedJudgment out;
  out.raw_first_line = std::string(line);
  out.lenient = line.find(',') != std::string_view::npos;
  std::vector<std::string_view> tokens;
  std::size_t start = 0;
  auto is_sep = [&](char c) { return is_space(c) || (out.lenient && c == ','); };
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || is_sep(line[i])) {
      if (i > start) tokens.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  if (tokens.size() != 2 || !is_plain_number(tokens[0]) ||
      !is_plain_number(tokens[1])) {
    throw JudgmentParseError(std::string(raw),
                             "first line must hold exactly two scores: '" +
                                 out.raw_first_line + "'");
  }
  out.score_first = to_score(tokens[0], raw);
  out.score_second = to_score(tokens[1], raw);
  out.explanation = std::string(trim(raw.substr(next)));
  return out;
}

double relative_score(double s_m, double s_c) {
  if (s_c == 0.0) {
    throw ZeroControlScore("control score is 0; relative score undefined");
  }
  return s_m / s_c;
}

PairwiseJudgment make_judgment(std::string prompt_id, Ordering ordering,
                               const ParsedJudgment& parsed) {
  PairwiseJudgment j;
  j.prompt_id = std::move(prompt_id);
  j.ordering = ordering;
  j.score_first = parsed.score_first;
  j.score_second = parsed.score_second;
  j.explanation = parsed.explanation;
  j.raw_first_line = parsed.raw_first_line;
  j.lenient = parsed.lenient;
  return j;
}

DebiasedScore combine_orderings(
    const std::string& prompt_id,
    const std::optional<PairwiseJudgment>& model_first,
    const std::optional<PairwiseJudgment>& control_first) {
  DebiasedScore out;
  out.prompt_id = prompt_id;
  double sum_m = 0.0;
  double sum_c = 0.0;
  double sum_r = 0.0;
  int used = 0;
  auto take = [&](const std::optional<PairwiseJudgment>& j,
                  std::optional<double>& slot) {
    if (!j) return;
    try {
      slot = relative_score(j->s_m(), j->s_c());
    } catch (const ZeroControlScore&) {
      spdlog::warn("{}: control scored 0 ({}); ordering skipped", prompt_id,
                   to_string(j->ordering));
      return;
    }
    sum_m += j->s_m();
    sum_c += j->s_c();
    sum_r += *slot;
    ++used;
  };
  take(model_first, out.s_r_ab);
  take(control_first, out.s_r_ba);
  if (used == 0) {
    throw JudgmentUnavailable("no usable judgment ordering for prompt '" +
                              prompt_id + "'");
  }
  out.s_m = sum_m / used;
  out.s_c = sum_c / used;
  out.s_r = sum_r / used;
  out.partial = used < 2;
  return out;
}

OracleJudge::OracleJudge(Gateway& gateway, std::string oracle_model,
                         PromptSet prompts, GenerationParams params,
                         RunStore* store)
    : gateway_(gateway),
      oracle_(std::move(oracle_model)),
      prompts_(std::move(prompts)),
      params_(params),
      store_(store) {
  prompts_.validate();
  params_.validate();
}

PairwiseJudgment OracleJudge::judge_ordered(const TaskPrompt& prompt,
                                            std::string_view y_model,
                                            std::string_view y_control,
                                            Ordering ordering,
                                            const JudgeSubject& subject) {
  const bool model_first = ordering == Ordering::kModelFirst;
  RenderedEval rendered =
      render_eval_prompt(prompt.text, model_first ? y_model : y_control,
                         model_first ? y_control : y_model, prompts_);
  if (rendered.empty_slot) {
    spdlog::warn("{}: judging an empty response ({})", prompt.id,
                 to_string(ordering));
  }
  auto failure = [&](const std::exception& error) {
    if (!store_) return;
    RunEvent e;
    e.kind = EventKind::kFailure;
    e.phase = "judgment";
    e.model = subject.candidate;
    e.backend_model = oracle_;
    e.prompt_id = prompt.id;
    e.ordering = ordering;
    e.variant = subject.variant;
    const auto* typed = dynamic_cast<const Error*>(&error);
    e.content =
        (typed ? typed->kind() : std::string("Error")) + ": " + error.what();
    store_->record(std::move(e));
  };

  CompletionRequest req;
  req.model = oracle_;
  req.user_content = std::move(rendered.text);
  req.params = params_;
  CompletionResponse resp;
  try {
    resp = gateway_.send_completion(req);
  } catch (const std::exception& e) {
    failure(e);
    throw;
  }
  if (store_) {
    RunEvent e;
    e.kind = EventKind::kJudgment;
    e.model = subject.candidate;
    e.backend_model = oracle_;
    e.prompt_id = prompt.id;
    e.ordering = ordering;
    e.variant = subject.variant;
    e.content = resp.content;
    e.usage = {resp.prompt_tokens, resp.completion_tokens,
               resp.usage_approximate};
    e.empty_response = resp.content.empty();
    store_->record(std::move(e));
  }
  try {
    return make_judgment(prompt.id, ordering, parse_judgment(resp.content));
  } catch (const Error& e) {
    failure(e);
    throw;
  }
}

DebiasedScore OracleJudge::judge_debiased(const TaskPrompt& prompt,
                                          std::string_view y_model,
                                          std::string_view y_control,
                                          const JudgeSubject& subject) {
  auto one = [&](Ordering o) -> std::optional<PairwiseJudgment> {
    try {
      return judge_ordered(prompt, y_model, y_control, o, subject);
    } catch (const JudgmentParseError& e) {
      spdlog::warn("{}: unparseable judgment ({}): {}", prompt.id, to_string(o),
                   e.what());
    } catch (const ScoreOutOfRange& e) {
      spdlog::warn("{}: judgment out of range ({}): {}", prompt.id,
                   to_string(o), e.what());
    }
    return std::nullopt;
  };
  auto ab = one(Ordering::kModelFirst);
  auto ba = one(Ordering::kControlFirst);
  return combine_orderings(prompt.id, ab, ba);
}

}  // namespace perfics
