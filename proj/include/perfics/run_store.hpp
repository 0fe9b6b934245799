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

#ifndef PERFICS_RUN_STORE_HPP_
#define PERFICS_RUN_STORE_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "perfics/config.hpp"
#include "perfics/types.hpp"

namespace perfics {

enum class EventKind { kZeroShot, kCritique, kRefine, kJudgment, kFailure };
std::string_view to_string(EventKind k);
EventKind parse_event_kind(std::string_view text);

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
  bool approximate = false;

  bool operator==(const TokenUsage&) const = default;
};

// One line of the event log.
//
// Generation events carry the model output in `content`. Judgment events
// carry the raw oracle text; `model` is the judged candidate, `variant`
// names which of its outputs was judged and `backend_model` is the oracle.
// Failure events name the failed `phase` and hold "<ErrorKind>: <message>".
struct RunEvent {
  std::string run_id;
  std::int64_t seq = 0;
  EventKind kind = EventKind::kZeroShot;
  std::string model;
  std::string prompt_id;
  std::optional<Ordering> ordering;
  std::string content;
  TokenUsage usage;
  std::string timestamp;

  int round = 0;
  std::optional<Variant> variant;
  std::string backend_model;
  std::string phase;
  bool empty_response = false;

  nlohmann::json to_json() const;
  static RunEvent from_json(const nlohmann::json& j);
  bool operator==(const RunEvent&) const = default;
};

// A unit of backend work. Generation units use kind zero_shot, critique or
// refine (round counts critique/refine iterations from 0); judgment units
// name the candidate, the variant and the ordering.
struct WorkUnit {
  EventKind kind = EventKind::kZeroShot;
  std::string model;
  std::string prompt_id;
  int round = 0;
  std::optional<Variant> variant;
  std::optional<Ordering> ordering;

  std::string key() const;
  static WorkUnit of(const RunEvent& e);
  bool operator==(const WorkUnit&) const = default;
};

struct LogReadResult {
  std::vector<RunEvent> events;
  // Byte length of the valid prefix.
  std::uintmax_t valid_bytes = 0;
  bool dropped_tail = false;
};

// Parses an events file. A damaged final line is dropped and reported via
// `dropped_tail`; damage anywhere else throws CorruptLog.
LogReadResult read_event_log(const std::filesystem::path& path);

// Append-only, resumable record of one run directory:
//   <dir>/manifest.json   run_id + config snapshot
//   <dir>/events.jsonl    {"event": {...}, "sha256": "<hex of event dump>"}
//   <dir>/fixtures/       request fixtures
//
// Appends are serialized by an internal mutex and flushed (fsync when
// `durable`) before returning.
class RunStore {
 public:
  static RunStore create(const std::filesystem::path& dir, std::string run_id,
                         nlohmann::json config_snapshot, bool durable = true);
  static RunStore open(const std::filesystem::path& dir, bool durable = true);
  // Opens `dir` if it holds a manifest, else creates it.
  static RunStore open_or_create(const std::filesystem::path& dir,
                                 std::string run_id,
                                 nlohmann::json config_snapshot,
                                 bool durable = true);

  RunStore(RunStore&& other) noexcept;
  RunStore& operator=(RunStore&&) = delete;
  ~RunStore();

  // Appends `e` as given. Throws SequenceRegression unless e.seq exceeds the
  // last sequence number, StorageError on I/O failure.
  std::int64_t append_event(const RunEvent& e);
  // Stamps run_id, the next seq and the current UTC time, then appends.
  // Inside run_in_log_order the event is queued instead and 0 is returned.
  std::int64_t record(RunEvent e);

  std::vector<RunEvent> events() const;
  std::set<std::string> completed_keys() const;
  const std::string& run_id() const { return run_id_; }
  const nlohmann::json& manifest() const { return manifest_; }
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path events_path() const { return dir_ / "events.jsonl"; }
  std::filesystem::path fixtures_dir() const { return dir_ / "fixtures"; }

 private:
  RunStore(std::filesystem::path dir, std::string run_id,
           nlohmann::json manifest, bool durable);
  void open_for_append();
  std::int64_t append_locked(const RunEvent& e);

  std::filesystem::path dir_;
  std::string run_id_;
  nlohmann::json manifest_;
  bool durable_;
  int fd_ = -1;
  mutable std::mutex mu_;
  std::int64_t last_seq_ = 0;
  std::vector<RunEvent> events_;
  std::set<std::string> completed_;
};

// Plan entries whose work has not completed, in plan order. A unit is
// complete once its generation or judgment event is in the log; failures do
// not count.
// Runs fn(0..n-1) on up to `workers` threads. Events a task records into
// `store` are held back and appended in task order, so the log does not
// depend on scheduling. Every task runs even if some throw; afterwards an
// append failure is rethrown, else the exception of the lowest failing task.
void run_in_log_order(RunStore* store, std::size_t n, int workers,
                      const std::function<void(std::size_t)>& fn);

std::vector<WorkUnit> pending_work(const RunStore& store,
                                   const std::vector<WorkUnit>& plan);

struct UsageTotals {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t call_count = 0;
  double estimated_cost = 0.0;

  bool operator==(const UsageTotals&) const = default;
};

// Token and cost totals. Generation events are booked against the model that
// produced them; judgment events against the oracle.
struct CostLedger {
  std::map<std::string, UsageTotals> models;
  std::map<std::string, UsageTotals> oracles;
  double estimated_cost = 0.0;
};

CostLedger cost_summary(const std::vector<RunEvent>& events,
                        const std::map<std::string, Price>& prices);

std::string utc_timestamp_now();

}  // namespace perfics

#endif  // PERFICS_RUN_STORE_HPP_
