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

#ifndef PERFICS_TRANSCRIPT_HPP_
#define PERFICS_TRANSCRIPT_HPP_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "perfics/run_store.hpp"
#include "perfics/types.hpp"

namespace perfics {

struct RefinementRound {
  std::string critique;
  std::string refined;

  bool operator==(const RefinementRound&) const = default;
};

struct PhaseUsage {
  EventKind phase = EventKind::kZeroShot;
  int round = 0;
  TokenUsage usage;

  bool operator==(const PhaseUsage&) const = default;
};

// y0, then one (critique, refined) pair per iteration. `usage` holds one
// entry per phase in execution order: 1 + 2 * rounds.size() when complete.
struct RefinementTranscript {
  std::string model;
  std::string prompt_id;
  std::string y0;
  std::vector<RefinementRound> rounds;
  std::vector<PhaseUsage> usage;
  GenerationParams params;
  bool empty_response = false;

  const std::string& latest_response() const {
    return rounds.empty() ? y0 : rounds.back().refined;
  }
  bool complete(int iterations) const {
    return !usage.empty() && static_cast<int>(rounds.size()) == iterations &&
           usage.size() == 1 + 2 * rounds.size();
  }
  int zero_shot_tokens() const;
  int final_tokens() const;

  bool operator==(const RefinementTranscript&) const = default;
};

struct ControlTranscript {
  std::string model;
  std::string prompt_id;
  std::string y_c;
  TokenUsage usage;
  bool empty_response = false;

  bool operator==(const ControlTranscript&) const = default;
};

using TranscriptKey = std::pair<std::string, std::string>;  // (model, prompt)

// Rebuilds every (possibly partial) transcript from generation events.
// Phases are taken in log order; a phase recorded twice keeps the first.
std::map<TranscriptKey, RefinementTranscript> transcripts_from_events(
    const std::vector<RunEvent>& events, const GenerationParams& params);

}  // namespace perfics

#endif  // PERFICS_TRANSCRIPT_HPP_
