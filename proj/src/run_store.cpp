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

#include "perfics/run_store.hpp"

#include <fcntl.h>
#include <spdlog/spdlog.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "perfics/errors.hpp"
#include "perfics/hashing.hpp"

namespace perfics {

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::kZeroShot: return "zero_shot";
    case EventKind::kCritique: return "critique";
    case EventKind::kRefine: return "refine";
    case EventKind::kJudgment: return "judgment";
    case EventKind::kFailure: return "failure";
  }
  return "failure";
}

EventKind parse_event_kind(std::string_view text) {
  if (text == "zero_shot") return EventKind::kZeroShot;
  if (text == "critique") return EventKind::kCritique;
  if (text == "refine") return EventKind::kRefine;
  if (text == "judgment") return EventKind::kJudgment;
  if (text == "failure") return EventKind::kFailure;
  throw CorruptLog("unknown event kind '" + std::string(text) + "'");
}

nlohmann::json RunEvent::to_json() const {
  nlohmann::json j = {
      {"run_id", run_id},
      {"seq", seq},
      {"kind", std::string(perfics::to_string(kind))},
      {"model", model},
      {"prompt_id", prompt_id},
      {"content", content},
      {"usage",
       {{"prompt_tokens", usage.prompt_tokens},
        {"completion_tokens", usage.completion_tokens},
        {"approximate", usage.approximate}}},
      {"timestamp", timestamp},
      {"round", round},
      {"backend_model", backend_model},
      {"phase", phase},
      {"empty_response", empty_response},
  };
  j["ordering"] = ordering ? nlohmann::json(std::string(perfics::to_string(*ordering)))
                           : nlohmann::json();
  j["variant"] = variant ? nlohmann::json(std::string(perfics::to_string(*variant)))
                         : nlohmann::json();
  return j;
}

RunEvent RunEvent::from_json(const nlohmann::json& j) {
  RunEvent e;
  e.run_id = j.at("run_id").get<std::string>();
  e.seq = j.at("seq").get<std::int64_t>();
  e.kind = parse_event_kind(j.at("kind").get<std::string>());
  e.model = j.at("model").get<std::string>();
  e.prompt_id = j.at("prompt_id").get<std::string>();
  e.content = j.at("content").get<std::string>();
  const auto& u = j.at("usage");
  e.usage.prompt_tokens = u.at("prompt_tokens").get<int>();
  e.usage.completion_tokens = u.at("completion_tokens").get<int>();
  e.usage.approximate = u.value("approximate", false);
  e.timestamp = j.at("timestamp").get<std::string>();
  e.round = j.value("round", 0);
  e.backend_model = j.value("backend_model", std::string());
  e.phase = j.value("phase", std::string());
  e.empty_response = j.value("empty_response", false);
  if (j.contains("ordering") && !j.at("ordering").is_null()) {
    e.ordering = parse_ordering(j.at("ordering").get<std::string>());
  }
  if (j.contains("variant") && !j.at("variant").is_null()) {
    e.variant = parse_variant(j.at("variant").get<std::string>());
  }
  return e;
}

std::string WorkUnit::key() const {
  std::string k = std::string(to_string(kind)) + "|" + model + "|" + prompt_id +
                  "|" + std::to_string(round);
  k += "|";
  if (variant) k += to_string(*variant);
  k += "|";
  if (ordering) k += to_string(*ordering);
  return k;
}

WorkUnit WorkUnit::of(const RunEvent& e) {
  WorkUnit u;
  u.kind = e.kind;
  u.model = e.model;
  u.prompt_id = e.prompt_id;
  u.round = e.round;
  if (e.kind == EventKind::kJudgment) {
    u.variant = e.variant;
    u.ordering = e.ordering;
  }
  return u;
}

std::string utc_timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch()) %
                  1000;
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof(out), "%s.%03dZ", buf, static_cast<int>(ms.count()));
  return out;
}

namespace {

std::string encode_line(const RunEvent& e) {
  const std::string body = e.to_json().dump();
  // Embed the already-serialized event so the checksum covers exact bytes.
  return "{\"event\":" + body + ",\"sha256\":\"" + sha256_hex(body) + "\"}\n";
}

RunEvent decode_line(const std::string& line) {
  auto doc = nlohmann::json::parse(line);
  const auto& event = doc.at("event");
  const std::string body = event.dump();
  if (doc.at("sha256").get<std::string>() != sha256_hex(body)) {
    throw CorruptLog("checksum mismatch");
  }
  return RunEvent::from_json(event);
}

bool is_completion(EventKind k) { return k != EventKind::kFailure; }

struct DeferredEvents {
  const RunStore* owner = nullptr;
  std::vector<RunEvent> events;
};

thread_local DeferredEvents* t_deferred = nullptr;

}  // namespace

LogReadResult read_event_log(const std::filesystem::path& path) {
  LogReadResult result;
  std::ifstream in(path, std::ios::binary);
  if (!in) return result;
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string data = buf.str();

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < data.size()) {
    ++line_no;
    const std::size_t nl = data.find('\n', pos);
    const bool last = nl == std::string::npos || nl + 1 == data.size();
    const std::string line =
        data.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    try {
      if (nl == std::string::npos) throw CorruptLog("missing line terminator");
      RunEvent e = decode_line(line);
      if (!result.events.empty() && e.seq <= result.events.back().seq) {
        throw CorruptLog("sequence regression");
      }
      result.events.push_back(std::move(e));
      pos = nl + 1;
      result.valid_bytes = pos;
    } catch (const std::exception& e) {
      if (!last) {
        throw CorruptLog(path.string() + ": line " + std::to_string(line_no) +
                         ": " + e.what());
      }
      spdlog::warn("{}: dropping damaged final line {} ({})", path.string(),
                   line_no, e.what());
      result.dropped_tail = true;
      break;
    }
  }
  return result;
}

RunStore::RunStore(std::filesystem::path dir, std::string run_id,
                   nlohmann::json manifest, bool durable)
    : dir_(std::move(dir)),
      run_id_(std::move(run_id)),
      manifest_(std::move(manifest)),
      durable_(durable) {}

RunStore::RunStore(RunStore&& other) noexcept
    : dir_(std::move(other.dir_)),
      run_id_(std::move(other.run_id_)),
      manifest_(std::move(other.manifest_)),
      durable_(other.durable_),
      fd_(other.fd_),
      last_seq_(other.last_seq_),
      events_(std::move(other.events_)),
      completed_(std::move(other.completed_)) {
  other.fd_ = -1;
}

RunStore::~RunStore() {
  if (fd_ >= 0) ::close(fd_);
}

void RunStore::open_for_append() {
  fd_ = ::open(events_path().c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC,
               0644);
  if (fd_ < 0) {
    throw StorageError("cannot open " + events_path().string() + ": " +
                       std::strerror(errno));
  }
}

RunStore RunStore::create(const std::filesystem::path& dir, std::string run_id,
                          nlohmann::json config_snapshot, bool durable) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "fixtures", ec);
  if (ec) throw StorageError("cannot create run dir " + dir.string());
  if (std::filesystem::exists(dir / "manifest.json")) {
    throw StorageError("run already exists in " + dir.string());
  }
  nlohmann::json manifest = {{"run_id", run_id},
                             {"created", utc_timestamp_now()},
                             {"config", std::move(config_snapshot)}};
  {
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
    if (!out) throw StorageError("cannot write manifest in " + dir.string());
  }
  RunStore store(dir, std::move(run_id), std::move(manifest), durable);
  store.open_for_append();
  return store;
}

RunStore RunStore::open(const std::filesystem::path& dir, bool durable) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw StorageError("no manifest in " + dir.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw CorruptLog(std::string("manifest: ") + e.what());
  }
  RunStore store(dir, manifest.at("run_id").get<std::string>(), manifest,
                 durable);
  std::filesystem::create_directories(store.fixtures_dir());
  LogReadResult log = read_event_log(store.events_path());
  if (log.dropped_tail) {
    std::filesystem::resize_file(store.events_path(), log.valid_bytes);
  }
  for (auto& e : log.events) {
    if (e.run_id != store.run_id_) {
      throw CorruptLog("event seq " + std::to_string(e.seq) +
                       " belongs to run '" + e.run_id + "'");
    }
    store.last_seq_ = e.seq;
    if (is_completion(e.kind)) store.completed_.insert(WorkUnit::of(e).key());
    store.events_.push_back(std::move(e));
  }
  store.open_for_append();
  return store;
}

RunStore RunStore::open_or_create(const std::filesystem::path& dir,
                                  std::string run_id,
                                  nlohmann::json config_snapshot,
                                  bool durable) {
  if (std::filesystem::exists(dir / "manifest.json")) return open(dir, durable);
  return create(dir, std::move(run_id), std::move(config_snapshot), durable);
}

std::int64_t RunStore::append_event(const RunEvent& e) {
  std::lock_guard lock(mu_);
  return append_locked(e);
}

std::int64_t RunStore::append_locked(const RunEvent& e) {
  if (e.run_id != run_id_) {
    throw StorageError("event for run '" + e.run_id + "' appended to run '" +
                       run_id_ + "'");
  }
  if (e.seq <= last_seq_) {
    throw SequenceRegression("seq " + std::to_string(e.seq) +
                             " does not follow " + std::to_string(last_seq_));
  }
  const std::string line = encode_line(e);
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw StorageError(std::string("append failed: ") + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  if (durable_ && ::fsync(fd_) != 0) {
    throw StorageError(std::string("fsync failed: ") + std::strerror(errno));
  }
  last_seq_ = e.seq;
  if (is_completion(e.kind)) completed_.insert(WorkUnit::of(e).key());
  events_.push_back(e);
  return e.seq;
}

std::int64_t RunStore::record(RunEvent e) {
  if (t_deferred != nullptr && t_deferred->owner == this) {
    t_deferred->events.push_back(std::move(e));
    return 0;
  }
  std::lock_guard lock(mu_);
  e.run_id = run_id_;
  e.seq = last_seq_ + 1;
  e.timestamp = utc_timestamp_now();
  return append_locked(e);
}

std::vector<RunEvent> RunStore::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::set<std::string> RunStore::completed_keys() const {
  std::lock_guard lock(mu_);
  return completed_;
}

void run_in_log_order(RunStore* store, std::size_t n, int workers,
                      const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  if (store == nullptr || workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::mutex mu;
    std::vector<std::optional<std::vector<RunEvent>>> done(n);
    std::size_t next_commit = 0;
    std::exception_ptr append_error;
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
      for (std::size_t i = next++; i < n; i = next++) {
        DeferredEvents deferred{store, {}};
        t_deferred = &deferred;
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
        t_deferred = nullptr;
        std::lock_guard lock(mu);
        done[i] = std::move(deferred.events);
        try {
          for (; !append_error && next_commit < n && done[next_commit]; ++next_commit) {
            for (auto& e : *done[next_commit]) store->record(std::move(e));
            done[next_commit]->clear();
          }
        } catch (...) {
          // The log is no longer contiguous; stop appending.
          append_error = std::current_exception();
        }
      }
    };
    {
      std::vector<std::jthread> pool;
      const auto count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
      for (std::size_t w = 0; w < count; ++w) pool.emplace_back(worker);
    }
    if (append_error) std::rethrow_exception(append_error);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<WorkUnit> pending_work(const RunStore& store,
                                   const std::vector<WorkUnit>& plan) {
  const auto done = store.completed_keys();
  std::vector<WorkUnit> out;
  for (const auto& unit : plan) {
    if (!done.contains(unit.key())) out.push_back(unit);
  }
  return out;
}

CostLedger cost_summary(const std::vector<RunEvent>& events,
                        const std::map<std::string, Price>& prices) {
  CostLedger ledger;
  for (const auto& e : events) {
    if (e.kind == EventKind::kFailure) continue;
    const std::string& who = e.backend_model.empty() ? e.model : e.backend_model;
    UsageTotals& t = e.kind == EventKind::kJudgment ? ledger.oracles[who]
                                                    : ledger.models[who];
    t.prompt_tokens += e.usage.prompt_tokens;
    t.completion_tokens += e.usage.completion_tokens;
    t.call_count += 1;
  }
  auto price = [&](const std::string& model, UsageTotals& t) {
    auto it = prices.find(model);
    if (it == prices.end()) return;
    t.estimated_cost =
        (static_cast<double>(t.prompt_tokens) * it->second.prompt_per_1k +
         static_cast<double>(t.completion_tokens) *
             it->second.completion_per_1k) /
        1000.0;
  };
  for (auto& [model, t] : ledger.models) {
    price(model, t);
    ledger.estimated_cost += t.estimated_cost;
  }
  for (auto& [model, t] : ledger.oracles) {
    price(model, t);
    ledger.estimated_cost += t.estimated_cost;
  }
  return ledger;
}

}  // namespace perfics
