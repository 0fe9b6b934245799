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

#ifndef PERFICS_GATEWAY_HPP_
#define PERFICS_GATEWAY_HPP_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "json.hpp"
#include "perfics/config.hpp"
#include "perfics/types.hpp"

namespace perfics {

struct CompletionRequest {
  std::string model;
  std::optional<std::string> system_instruction;
  std::string user_content;
  GenerationParams params;

  void validate() const;
  nlohmann::json to_json() const;
  bool operator==(const CompletionRequest&) const = default;
};

struct CompletionResponse {
  std::string content;
  int prompt_tokens = 0;
  int completion_tokens = 0;
  int latency_ms = 0;
  std::string backend_id;
  bool empty_content = false;
  // Token counts came from count_tokens_fallback rather than the backend.
  bool usage_approximate = false;
  int attempts = 1;

  nlohmann::json to_json() const;
  static CompletionResponse from_json(const nlohmann::json& j);
};

// Number of maximal runs of non-whitespace characters.
int count_tokens_fallback(std::string_view text);

// Chat-completion body: {model, messages, temperature, top_p, max_tokens,
// seed} plus the sampler extension fields when `with_extensions` is set.
nlohmann::json chat_request_body(const CompletionRequest& req,
                                 bool with_extensions);
// Reads choices[0].message.content and the usage block. Missing usage falls
// back to count_tokens_fallback on both sides and is flagged approximate.
CompletionResponse parse_chat_response(const std::string& body,
                                       const CompletionRequest& req,
                                       std::string_view backend_id);

struct HttpResult {
  int status = 0;
  std::string body;
};

// One HTTP POST. Throws TransportError when no response was received and
// TimeoutError when the read timed out.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResult post(const std::string& path, const std::string& body,
                          const std::map<std::string, std::string>& headers) = 0;
};

std::unique_ptr<Transport> make_http_transport(const std::string& base_url,
                                               int timeout_ms);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual CompletionResponse complete(const CompletionRequest& req) = 0;
  virtual std::string id() const = 0;
};

// Single-attempt client for a chat-completion endpoint. If the endpoint
// rejects the extension fields with a 400/422, they are dropped with a
// warning and the call is repeated once without them.
class HttpBackend : public Backend {
 public:
  HttpBackend(std::string id, EndpointConfig endpoint,
              std::unique_ptr<Transport> transport);
  CompletionResponse complete(const CompletionRequest& req) override;
  std::string id() const override { return id_; }

 private:
  std::map<std::string, std::string> headers() const;

  std::string id_;
  EndpointConfig endpoint_;
  std::unique_ptr<Transport> transport_;
  std::atomic<bool> extensions_enabled_;
};

// Content-addressed request/response store, one file per request key.
class FixtureStore {
 public:
  explicit FixtureStore(std::filesystem::path dir);

  // SHA-256 over the canonical JSON of (model, system_instruction,
  // user_content, params).
  static std::string key(const CompletionRequest& req);

  std::string record(const CompletionRequest& req,
                     const CompletionResponse& resp);
  CompletionResponse replay(const CompletionRequest& req) const;
  bool contains(const CompletionRequest& req) const;
  std::filesystem::path path_for(const std::string& key) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
};

class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(std::shared_ptr<const FixtureStore> store)
      : store_(std::move(store)) {}
  CompletionResponse complete(const CompletionRequest& req) override;
  std::string id() const override { return "replay"; }

 private:
  std::shared_ptr<const FixtureStore> store_;
};

class RecordingBackend : public Backend {
 public:
  RecordingBackend(std::shared_ptr<Backend> inner,
                   std::shared_ptr<FixtureStore> store)
      : inner_(std::move(inner)), store_(std::move(store)) {}
  CompletionResponse complete(const CompletionRequest& req) override;
  std::string id() const override { return inner_->id(); }

 private:
  std::shared_ptr<Backend> inner_;
  std::shared_ptr<FixtureStore> store_;
};

// Bounds the number of requests in flight.
class ConcurrencyLimiter {
 public:
  explicit ConcurrencyLimiter(int limit) : limit_(limit) {}
  void acquire();
  void release();
  int in_flight() const;

 private:
  int limit_;
  int in_flight_ = 0;
  mutable std::mutex mu_;
  std::condition_variable cv_;
};

// Routes requests to per-model backends with retries, a concurrency cap and
// a usage hook. Shareable across threads.
class Gateway {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;
  using UsageHook =
      std::function<void(const CompletionRequest&, const CompletionResponse&)>;

  explicit Gateway(RetryPolicy policy, Sleeper sleeper = {},
                   std::uint64_t jitter_seed = 0x5eed);

  void register_backend(const std::string& model,
                        std::shared_ptr<Backend> backend);
  void set_usage_hook(UsageHook hook);

  CompletionResponse send_completion(const CompletionRequest& req);
  CompletionResponse send_completion(const CompletionRequest& req,
                                     const RetryPolicy& policy);

  // Backoff before attempt `attempt + 1`: base * 2^(attempt-1), scaled by a
  // uniform factor in [0.5, 1).
  std::chrono::milliseconds backoff_delay(const RetryPolicy& policy,
                                          int attempt);

  const RetryPolicy& policy() const { return policy_; }

 private:
  RetryPolicy policy_;
  Sleeper sleeper_;
  ConcurrencyLimiter limiter_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Backend>> backends_;
  UsageHook usage_hook_;
  std::mt19937_64 jitter_;
};

enum class BackendMode { kLive, kRecord, kReplay };
BackendMode parse_backend_mode(std::string_view text);

using TransportFactory = std::function<std::unique_ptr<Transport>(
    const std::string& endpoint_name, const EndpointConfig& endpoint)>;

// Wires one backend per configured model. In replay mode the transport
// factory is never invoked.
std::unique_ptr<Gateway> make_gateway(const HarnessConfig& config,
                                      BackendMode mode,
                                      const std::filesystem::path& fixtures_dir,
                                      TransportFactory transports = {},
                                      Gateway::Sleeper sleeper = {});

}  // namespace perfics

#endif  // PERFICS_GATEWAY_HPP_
