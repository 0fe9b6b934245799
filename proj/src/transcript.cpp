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

#include "perfics/transcript.hpp"

namespace perfics {

int RefinementTranscript::zero_shot_tokens() const {
  for (const auto& u : usage) {
    if (u.phase == EventKind::kZeroShot) return u.usage.completion_tokens;
  }
  return 0;
}

int RefinementTranscript::final_tokens() const {
  if (rounds.empty()) return zero_shot_tokens();
  const int last_round = static_cast<int>(rounds.size()) - 1;
  for (const auto& u : usage) {
    if (u.phase == EventKind::kRefine && u.round == last_round) {
      return u.usage.completion_tokens;
    }
  }
  return 0;
}

std::map<TranscriptKey, RefinementTranscript> transcripts_from_events(
    const std::vector<RunEvent>& events, const GenerationParams& params) {
  std::map<TranscriptKey, RefinementTranscript> out;
  for (const auto& e : events) {
    if (e.kind != EventKind::kZeroShot && e.kind != EventKind::kCritique &&
        e.kind != EventKind::kRefine) {
      continue;
    }
    auto [it, inserted] = out.try_emplace({e.model, e.prompt_id});
    RefinementTranscript& t = it->second;
    if (inserted) {
      t.model = e.model;
      t.prompt_id = e.prompt_id;
      t.params = params;
    }
    const auto rounds = static_cast<int>(t.rounds.size());
    switch (e.kind) {
      case EventKind::kZeroShot:
        if (!t.usage.empty()) continue;
        t.y0 = e.content;
        break;
      case EventKind::kCritique:
        // Critique k follows y0 (k = 0) or refined response k - 1.
        if (t.usage.empty() || e.round != rounds ||
            t.usage.size() != 1 + 2 * t.rounds.size()) {
          continue;
        }
        t.rounds.push_back({e.content, {}});
        break;
      case EventKind::kRefine:
        if (rounds == 0 || e.round != rounds - 1 ||
            t.usage.size() != 2 * t.rounds.size()) {
          continue;
        }
        t.rounds.back().refined = e.content;
        break;
      default:
        continue;
    }
    t.usage.push_back({e.kind, e.round, e.usage});
    t.empty_response = t.empty_response || e.empty_response;
  }
  return out;
}

}  // namespace perfics
