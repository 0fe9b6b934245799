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

#include "perfics/refinement.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <cctype>
#include <mutex>
#include <thread>

#include "perfics/errors.hpp"

namespace perfics {

std::string compose_zero_shot(const PromptSet& prompts, std::string_view task) {
  std::string out = prompts.zero;
  out += '\n';
  out += task;
  return out;
}

std::string compose_critique(const PromptSet& prompts, std::string_view task,
                             std::string_view response) {
  std::string out = "Question:\n";
  out += task;
  out += "\n\nResponse:\n";
  out += response;
  out += "\n\n";
  out += prompts.critique;
  return out;
}

std::string compose_refinement(const PromptSet& prompts, std::string_view task,
                               std::string_view response,
                               std::string_view critique) {
  std::string out = "Question:\n";
  out += task;
  out += "\n\nResponse:\n";
  out += response;
  out += "\n\nCritique:\n";
  out += critique;
  out += "\n\n";
  out += prompts.refiner;
  return out;
}

bool is_blank_response(std::string_view text) {
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

RefinementEngine::RefinementEngine(Gateway& gateway, PromptSet prompts,
                                   GenerationParams params, RunStore* store)
    : gateway_(gateway),
      prompts_(std::move(prompts)),
      params_(params),
      store_(store) {
  prompts_.validate();
  params_.validate();
}

PhaseOutput RefinementEngine::call(const std::string& model,
                                   std::string user_content) {
  CompletionRequest req;
  req.model = model;
  req.user_content = std::move(user_content);
  req.params = params_;
  CompletionResponse resp = gateway_.send_completion(req);
  PhaseOutput out;
  out.usage = {resp.prompt_tokens, resp.completion_tokens,
               resp.usage_approximate};
  out.empty_response = is_blank_response(resp.content);
  if (out.empty_response) {
    spdlog::warn("{}: backend returned an empty response", model);
  }
  out.content = std::move(resp.content);
  return out;
}

PhaseOutput RefinementEngine::generate_zero_shot(const std::string& model,
                                                 std::string_view task) {
  return call(model, compose_zero_shot(prompts_, task));
}

PhaseOutput RefinementEngine::generate_critique(const std::string& model,
                                                std::string_view task,
                                                std::string_view response) {
  return call(model, compose_critique(prompts_, task, response));
}

PhaseOutput RefinementEngine::generate_refinement(const std::string& model,
                                                  std::string_view task,
                                                  std::string_view response,
                                                  std::string_view critique) {
  return call(model, compose_refinement(prompts_, task, response, critique));
}

void RefinementEngine::persist(EventKind kind, const std::string& model,
                               const std::string& prompt_id, int round,
                               const PhaseOutput& out) {
  if (!store_) return;
  RunEvent e;
  e.kind = kind;
  e.model = model;
  e.backend_model = model;
  e.prompt_id = prompt_id;
  e.round = round;
  e.content = out.content;
  e.usage = out.usage;
  e.empty_response = out.empty_response;
  store_->record(std::move(e));
}

void RefinementEngine::persist_failure(const std::string& model,
                                       const std::string& prompt_id,
                                       std::string_view phase, int round,
                                       const std::exception& error) {
  if (!store_) return;
  RunEvent e;
  e.kind = EventKind::kFailure;
  e.model = model;
  e.backend_model = model;
  e.prompt_id = prompt_id;
  e.round = round;
  e.phase = std::string(phase);
  const auto* typed = dynamic_cast<const Error*>(&error);
  e.content = (typed ? typed->kind() : std::string("Error")) + ": " + error.what();
  store_->record(std::move(e));
}

RefinementTranscript RefinementEngine::run_procedure(const std::string& model,
                                                     const TaskPrompt& prompt,
                                                     int iterations) {
  if (iterations < 1) throw InvariantViolation("iterations", "must be >= 1");
  RefinementTranscript t;
  t.model = model;
  t.prompt_id = prompt.id;
  t.params = params_;
  if (store_) {
    auto existing = transcripts_from_events(store_->events(), params_);
    if (auto it = existing.find({model, prompt.id}); it != existing.end()) {
      t = std::move(it->second);
    }
  }
  if (static_cast<int>(t.rounds.size()) > iterations) {
    t.rounds.resize(iterations);
    t.usage.resize(1 + 2 * iterations);
  }

  auto phase = [&](EventKind kind, int round, auto&& fn) {
    try {
      PhaseOutput out = fn();
      persist(kind, model, prompt.id, round, out);
      t.usage.push_back({kind, round, out.usage});
      t.empty_response = t.empty_response || out.empty_response;
      return out.content;
    } catch (const std::exception& e) {
      persist_failure(model, prompt.id, to_string(kind), round, e);
      throw;
    }
  };

  if (t.usage.empty()) {
    t.y0 = phase(EventKind::kZeroShot, 0,
                 [&] { return generate_zero_shot(model, prompt.text); });
  }
  for (int k = 0; k < iterations; ++k) {
    if (static_cast<int>(t.rounds.size()) == k) {
      const std::string& latest = t.latest_response();
      std::string critique = phase(EventKind::kCritique, k, [&] {
        return generate_critique(model, prompt.text, latest);
      });
      t.rounds.push_back({std::move(critique), {}});
    }
    if (t.usage.size() == 2 + 2 * static_cast<std::size_t>(k)) {
      const std::string& response = k == 0 ? t.y0 : t.rounds[k - 1].refined;
      const std::string& critique = t.rounds[k].critique;
      t.rounds[k].refined = phase(EventKind::kRefine, k, [&] {
        return generate_refinement(model, prompt.text, response, critique);
      });
    }
  }
  return t;
}

ControlTranscript RefinementEngine::run_control(const std::string& control_model,
                                                const TaskPrompt& prompt) {
  ControlTranscript c;
  c.model = control_model;
  c.prompt_id = prompt.id;
  if (store_) {
    for (const auto& e : store_->events()) {
      if (e.kind == EventKind::kZeroShot && e.model == control_model &&
          e.prompt_id == prompt.id) {
        c.y_c = e.content;
        c.usage = e.usage;
        c.empty_response = e.empty_response;
        return c;
      }
    }
  }
  try {
    PhaseOutput out = generate_zero_shot(control_model, prompt.text);
    persist(EventKind::kZeroShot, control_model, prompt.id, 0, out);
    c.y_c = std::move(out.content);
    c.usage = out.usage;
    c.empty_response = out.empty_response;
  } catch (const std::exception& e) {
    persist_failure(control_model, prompt.id, "zero_shot", 0, e);
    throw;
  }
  return c;
}

namespace {

template <typename Fn>
BatchOutcome for_each_task(RunStore* store, std::size_t count, int workers, Fn&& fn) {
  BatchOutcome outcome;
  std::mutex mu;
  run_in_log_order(store, count, workers, [&](std::size_t i) {
    try {
      fn(i);
      std::lock_guard lock(mu);
      ++outcome.completed;
    } catch (const std::exception& e) {
      std::lock_guard lock(mu);
      ++outcome.failed;
      outcome.failures.push_back(e.what());
    }
  });
  return outcome;
}

}  // namespace

BatchOutcome run_refinement_batch(RefinementEngine& engine,
                                  const std::vector<std::string>& models,
                                  const std::vector<TaskPrompt>& prompts,
                                  int iterations, int workers) {
  const std::size_t n = models.size() * prompts.size();
  return for_each_task(engine.store(), n, workers, [&](std::size_t i) {
    const auto& model = models[i / prompts.size()];
    const auto& prompt = prompts[i % prompts.size()];
    try {
      engine.run_procedure(model, prompt, iterations);
    } catch (const std::exception& e) {
      spdlog::error("{}/{}: {}", model, prompt.id, e.what());
      throw std::runtime_error(model + "/" + prompt.id + ": " + e.what());
    }
  });
}

BatchOutcome run_control_batch(RefinementEngine& engine,
                               const std::string& control_model,
                               const std::vector<TaskPrompt>& prompts,
                               int workers) {
  return for_each_task(engine.store(), prompts.size(), workers, [&](std::size_t i) {
    try {
      engine.run_control(control_model, prompts[i]);
    } catch (const std::exception& e) {
      spdlog::error("{}/{}: {}", control_model, prompts[i].id, e.what());
      throw std::runtime_error(control_model + "/" + prompts[i].id + ": " +
                               e.what());
    }
  });
}

}  // namespace perfics
