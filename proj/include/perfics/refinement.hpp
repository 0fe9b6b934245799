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

#ifndef PERFICS_REFINEMENT_HPP_
#define PERFICS_REFINEMENT_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "perfics/gateway.hpp"
#include "perfics/run_store.hpp"
#include "perfics/transcript.hpp"
#include "perfics/types.hpp"

namespace perfics {

// Request bodies for the three phases. Each context uses the labels
// "Question:", "Response:" and "Critique:" at most once, in that order:
//
//   zero:     <I_zero>\n<task>                 (I_zero ends with "Question:")
//   critique: Question:\n<task>\n\nResponse:\n<response>\n\n<I_critique>
//   refine:   Question:\n<task>\n\nResponse:\n<response>\n\n
//             Critique:\n<critique>\n\n<I_refiner>
//
// Later iterations substitute the latest refined response for <response>.
std::string compose_zero_shot(const PromptSet& prompts, std::string_view task);
std::string compose_critique(const PromptSet& prompts, std::string_view task,
                             std::string_view response);
std::string compose_refinement(const PromptSet& prompts, std::string_view task,
                               std::string_view response,
                               std::string_view critique);

// True when the text is empty or only whitespace.
bool is_blank_response(std::string_view text);

struct PhaseOutput {
  std::string content;
  TokenUsage usage;
  bool empty_response = false;
};

// Runs zero-shot -> critique -> refine for one model and task. When a store
// is attached, every phase is appended to it before the next one starts and
// phases already in the log are reused instead of being requested again.
class RefinementEngine {
 public:
  RefinementEngine(Gateway& gateway, PromptSet prompts, GenerationParams params,
                   RunStore* store = nullptr);

  PhaseOutput generate_zero_shot(const std::string& model,
                                 std::string_view task);
  PhaseOutput generate_critique(const std::string& model, std::string_view task,
                                std::string_view response);
  PhaseOutput generate_refinement(const std::string& model,
                                  std::string_view task,
                                  std::string_view response,
                                  std::string_view critique);

  // Throws InvariantViolation for iterations < 1. Any phase error is logged
  // as a failure event and rethrown.
  RefinementTranscript run_procedure(const std::string& model,
                                     const TaskPrompt& prompt, int iterations);

  // Zero-shot answer of the control model under I_zero.
  ControlTranscript run_control(const std::string& control_model,
                                const TaskPrompt& prompt);

  const PromptSet& prompts() const { return prompts_; }
  const GenerationParams& params() const { return params_; }
  RunStore* store() const { return store_; }

 private:
  PhaseOutput call(const std::string& model, std::string user_content);
  void persist(EventKind kind, const std::string& model,
               const std::string& prompt_id, int round, const PhaseOutput& out);
  void persist_failure(const std::string& model, const std::string& prompt_id,
                       std::string_view phase, int round,
                       const std::exception& error);

  Gateway& gateway_;
  PromptSet prompts_;
  GenerationParams params_;
  RunStore* store_;
};

struct BatchOutcome {
  int completed = 0;
  int failed = 0;
  std::vector<std::string> failures;  // "<model>/<prompt>: <message>"
};

// Runs run_procedure for every (model, prompt) pair. Pairs are independent;
// a failure in one does not stop the others. `workers` > 1 runs pairs on
// that many threads, still bounded by the gateway's concurrency limit.
BatchOutcome run_refinement_batch(RefinementEngine& engine,
                                  const std::vector<std::string>& models,
                                  const std::vector<TaskPrompt>& prompts,
                                  int iterations, int workers = 1);

BatchOutcome run_control_batch(RefinementEngine& engine,
                               const std::string& control_model,
                               const std::vector<TaskPrompt>& prompts,
                               int workers = 1);

}  // namespace perfics

#endif  // PERFICS_REFINEMENT_HPP_
