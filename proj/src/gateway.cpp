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

#include "perfics/gateway.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "perfics/errors.hpp"
#include "perfics/hashing.hpp"

namespace perfics {

void CompletionRequest::validate() const {
  if (model.empty()) throw InvariantViolation("model", "must be nonempty");
  if (user_content.empty()) {
    throw InvariantViolation("user_content", "must be nonempty");
  }
  params.validate();
}

nlohmann::json CompletionRequest::to_json() const {
  nlohmann::json j;
  j["model"] = model;
  j["system_instruction"] =
      system_instruction ? nlohmann::json(*system_instruction) : nlohmann::json();
  j["user_content"] = user_content;
  j["params"] = params;
  return j;
}

nlohmann::json CompletionResponse::to_json() const {
  return nlohmann::json{{"content", content},
                        {"prompt_tokens", prompt_tokens},
                        {"completion_tokens", completion_tokens},
                        {"latency_ms", latency_ms},
                        {"backend_id", backend_id},
                        {"empty_content", empty_content},
                        {"usage_approximate", usage_approximate}};
}

CompletionResponse CompletionResponse::from_json(const nlohmann::json& j) {
  CompletionResponse r;
  r.content = j.at("content").get<std::string>();
  r.prompt_tokens = j.at("prompt_tokens").get<int>();
  r.completion_tokens = j.at("completion_tokens").get<int>();
  r.latency_ms = j.value("latency_ms", 0);
  r.backend_id = j.value("backend_id", std::string());
  r.empty_content = j.value("empty_content", r.content.empty());
  r.usage_approximate = j.value("usage_approximate", false);
  return r;
}

int count_tokens_fallback(std::string_view text) {
  int count = 0;
  bool in_run = false;
  for (char ch : text) {
    const bool space = std::isspace(static_cast<unsigned char>(ch)) != 0;
    if (!space && !in_run) ++count;
    in_run = !space;
  }
  return count;
}

nlohmann::json chat_request_body(const CompletionRequest& req,
                                 bool with_extensions) {
  nlohmann::json messages = nlohmann::json::array();
  if (req.system_instruction) {
    messages.push_back({{"role", "system"}, {"content", *req.system_instruction}});
  }
  messages.push_back({{"role", "user"}, {"content", req.user_content}});
  const auto& p = req.params;
  nlohmann::json body = {{"model", req.model},
                         {"messages", std::move(messages)},
                         {"temperature", p.temperature},
                         {"top_p", p.top_p},
                         {"max_tokens", p.max_tokens}};
  // -1 asks the backend for a random seed; omitting the field does that.
  if (p.seed >= 0) body["seed"] = p.seed;
  if (with_extensions) {
    body["top_k"] = p.top_k;
    body["typical_p"] = p.typical_p;
    body["repetition_penalty"] = p.repetition_penalty;
    body["min_length"] = p.min_length;
    body["num_beams"] = p.num_beams;
    body["early_stopping"] = p.early_stopping;
    body["truncation_length"] = p.truncation_length;
    body["add_bos_token"] = p.add_bos_token;
    body["skip_special_tokens"] = p.skip_special_tokens;
  }
  return body;
}

CompletionResponse parse_chat_response(const std::string& body,
                                       const CompletionRequest& req,
                                       std::string_view backend_id) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw BackendError(200, "response body is not JSON");
  }
  CompletionResponse resp;
  resp.backend_id = std::string(backend_id);
  try {
    const auto& message = doc.at("choices").at(0).at("message");
    const auto& content = message.at("content");
    resp.content = content.is_null() ? std::string() : content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(200, std::string("response lacks choices[0].message: ") +
                                e.what());
  }
  resp.empty_content = resp.content.empty();
  const auto usage = doc.find("usage");
  if (usage != doc.end() && usage->is_object() &&
      usage->contains("prompt_tokens") && usage->contains("completion_tokens")) {
    resp.prompt_tokens = usage->at("prompt_tokens").get<int>();
    resp.completion_tokens = usage->at("completion_tokens").get<int>();
  } else {
    int prompt = count_tokens_fallback(req.user_content);
    if (req.system_instruction) {
      prompt += count_tokens_fallback(*req.system_instruction);
    }
    resp.prompt_tokens = prompt;
    resp.completion_tokens = count_tokens_fallback(resp.content);
    resp.usage_approximate = true;
  }
  if (resp.prompt_tokens < 0 || resp.completion_tokens < 0) {
    throw BackendError(200, "negative token usage in response");
  }
  return resp;
}

// ---------------------------------------------------------------------------

HttpBackend::HttpBackend(std::string id, EndpointConfig endpoint,
                         std::unique_ptr<Transport> transport)
    : id_(std::move(id)),
      endpoint_(std::move(endpoint)),
      transport_(std::move(transport)),
      extensions_enabled_(endpoint_.send_extensions) {}

std::map<std::string, std::string> HttpBackend::headers() const {
  std::map<std::string, std::string> h = {{"Content-Type", "application/json"}};
  if (!endpoint_.api_key_env.empty()) {
    if (const char* key = std::getenv(endpoint_.api_key_env.c_str())) {
      h["Authorization"] = std::string("Bearer ") + key;
    }
  }
  return h;
}

namespace {

std::string upstream_message(const std::string& body) {
  try {
    auto doc = nlohmann::json::parse(body);
    if (doc.contains("error")) {
      const auto& err = doc.at("error");
      if (err.is_string()) return err.get<std::string>();
      if (err.is_object() && err.contains("message")) {
        return err.at("message").get<std::string>();
      }
    }
  } catch (const nlohmann::json::exception&) {
  }
  return body.substr(0, 512);
}

}  // namespace

CompletionResponse HttpBackend::complete(const CompletionRequest& req) {
  const auto start = std::chrono::steady_clock::now();
  bool with_ext = extensions_enabled_.load();
  HttpResult result =
      transport_->post(endpoint_.path, chat_request_body(req, with_ext).dump(),
                       headers());
  if (with_ext && (result.status == 400 || result.status == 422)) {
    spdlog::warn(
        "{}: endpoint rejected request ({}); dropping top_k/typical_p/"
        "repetition_penalty extension fields",
        id_, result.status);
    extensions_enabled_ = false;
    result = transport_->post(endpoint_.path,
                              chat_request_body(req, false).dump(), headers());
  }
  if (result.status != 200) {
    throw BackendError(result.status, upstream_message(result.body));
  }
  CompletionResponse resp = parse_chat_response(result.body, req, id_);
  resp.latency_ms = static_cast<int>(
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start)
          .count());
  return resp;
}

// ---------------------------------------------------------------------------

FixtureStore::FixtureStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw StorageError("cannot create fixture dir " + dir_.string());
}

std::string FixtureStore::key(const CompletionRequest& req) {
  return sha256_hex(req.to_json().dump());
}

std::filesystem::path FixtureStore::path_for(const std::string& key) const {
  return dir_ / (key + ".json");
}

std::string FixtureStore::record(const CompletionRequest& req,
                                 const CompletionResponse& resp) {
  const std::string k = key(req);
  nlohmann::json response = resp.to_json();
  nlohmann::json doc = {{"key", k},
                        {"request", req.to_json()},
                        {"response", response},
                        {"checksum", sha256_hex(response.dump())}};
  std::lock_guard lock(mu_);
  const auto final_path = path_for(k);
  auto tmp = final_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << doc.dump(2) << '\n';
    if (!out) throw StorageError("cannot write fixture " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, final_path, ec);
  if (ec) throw StorageError("cannot publish fixture " + final_path.string());
  return k;
}

bool FixtureStore::contains(const CompletionRequest& req) const {
  return std::filesystem::exists(path_for(key(req)));
}

CompletionResponse FixtureStore::replay(const CompletionRequest& req) const {
  const std::string k = key(req);
  const auto path = path_for(k);
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw MissingFixtureError("no fixture for model '" + req.model +
                              "' (key " + k + ")");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    auto doc = nlohmann::json::parse(buf.str());
    const auto& response = doc.at("response");
    if (doc.at("key").get<std::string>() != k ||
        doc.at("checksum").get<std::string>() != sha256_hex(response.dump())) {
      throw FixtureCorruptError("checksum mismatch in " + path.string());
    }
    return CompletionResponse::from_json(response);
  } catch (const nlohmann::json::exception& e) {
    throw FixtureCorruptError(path.string() + ": " + e.what());
  }
}

CompletionResponse ReplayBackend::complete(const CompletionRequest& req) {
  return store_->replay(req);
}

CompletionResponse RecordingBackend::complete(const CompletionRequest& req) {
  CompletionResponse resp = inner_->complete(req);
  store_->record(req, resp);
  return resp;
}

// ---------------------------------------------------------------------------

void ConcurrencyLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return in_flight_ < limit_; });
  ++in_flight_;
}

void ConcurrencyLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
}

int ConcurrencyLimiter::in_flight() const {
  std::lock_guard lock(mu_);
  return in_flight_;
}

namespace {

class LimiterSlot {
 public:
  explicit LimiterSlot(ConcurrencyLimiter& limiter) : limiter_(limiter) {
    limiter_.acquire();
  }
  ~LimiterSlot() { limiter_.release(); }
  LimiterSlot(const LimiterSlot&) = delete;
  LimiterSlot& operator=(const LimiterSlot&) = delete;

 private:
  ConcurrencyLimiter& limiter_;
};

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

Gateway::Gateway(RetryPolicy policy, Sleeper sleeper, std::uint64_t jitter_seed)
    : policy_(policy),
      sleeper_(sleeper ? std::move(sleeper)
                       : Sleeper([](std::chrono::milliseconds d) {
                           std::this_thread::sleep_for(d);
                         })),
      limiter_(policy.max_concurrent),
      jitter_(jitter_seed) {
  policy_.validate();
}

void Gateway::register_backend(const std::string& model,
                               std::shared_ptr<Backend> backend) {
  std::lock_guard lock(mu_);
  backends_[model] = std::move(backend);
}

void Gateway::set_usage_hook(UsageHook hook) {
  std::lock_guard lock(mu_);
  usage_hook_ = std::move(hook);
}

std::chrono::milliseconds Gateway::backoff_delay(const RetryPolicy& policy,
                                                 int attempt) {
  const double base =
      static_cast<double>(policy.base_backoff_ms) * std::pow(2.0, attempt - 1);
  double factor;
  {
    std::lock_guard lock(mu_);
    factor = std::uniform_real_distribution<double>(0.5, 1.0)(jitter_);
  }
  return std::chrono::milliseconds(static_cast<long long>(base * factor));
}

CompletionResponse Gateway::send_completion(const CompletionRequest& req) {
  return send_completion(req, policy_);
}

CompletionResponse Gateway::send_completion(const CompletionRequest& req,
                                            const RetryPolicy& policy) {
  req.validate();
  policy.validate();
  std::shared_ptr<Backend> backend;
  UsageHook hook;
  {
    std::lock_guard lock(mu_);
    auto it = backends_.find(req.model);
    if (it == backends_.end()) {
      throw ConfigError("no endpoint configured for model '" + req.model + "'");
    }
    backend = it->second;
    hook = usage_hook_;
  }
  for (int attempt = 1;; ++attempt) {
    try {
      CompletionResponse resp;
      {
        LimiterSlot slot(limiter_);
        resp = backend->complete(req);
      }
      resp.attempts = attempt;
      if (attempt > 1) {
        spdlog::info("{}: succeeded on attempt {}", req.model, attempt);
      }
      if (hook) hook(req, resp);
      return resp;
    } catch (const BackendError& e) {
      if (!retryable_status(e.status()) || attempt >= policy.max_attempts) throw;
      spdlog::warn("{}: attempt {} failed: {}", req.model, attempt, e.what());
    } catch (const TimeoutError& e) {
      if (attempt >= policy.max_attempts) throw;
      spdlog::warn("{}: attempt {} timed out: {}", req.model, attempt, e.what());
    } catch (const TransportError& e) {
      if (attempt >= policy.max_attempts) throw;
      spdlog::warn("{}: attempt {} transport error: {}", req.model, attempt,
                   e.what());
    }
    sleeper_(backoff_delay(policy, attempt));
  }
}

BackendMode parse_backend_mode(std::string_view text) {
  if (text == "live") return BackendMode::kLive;
  if (text == "record") return BackendMode::kRecord;
  if (text == "replay") return BackendMode::kReplay;
  throw UsageError("--backend must be live, record or replay");
}

std::unique_ptr<Gateway> make_gateway(const HarnessConfig& config,
                                      BackendMode mode,
                                      const std::filesystem::path& fixtures_dir,
                                      TransportFactory transports,
                                      Gateway::Sleeper sleeper) {
  auto gateway = std::make_unique<Gateway>(config.retry, std::move(sleeper));
  auto fixtures = std::make_shared<FixtureStore>(fixtures_dir);
  if (!transports) {
    transports = [](const std::string&, const EndpointConfig& ep) {
      return make_http_transport(ep.base_url, ep.timeout_ms);
    };
  }
  for (const auto& model : config.models) {
    if (mode == BackendMode::kReplay) {
      gateway->register_backend(model.name,
                                std::make_shared<ReplayBackend>(fixtures));
      continue;
    }
    auto ep_name = config.model_endpoint.find(model.name);
    if (ep_name == config.model_endpoint.end()) continue;
    const EndpointConfig& ep = config.endpoints.at(ep_name->second);
    std::shared_ptr<Backend> live = std::make_shared<HttpBackend>(
        ep_name->second, ep, transports(ep_name->second, ep));
    if (mode == BackendMode::kRecord) {
      live = std::make_shared<RecordingBackend>(std::move(live), fixtures);
    }
    gateway->register_backend(model.name, std::move(live));
  }
  return gateway;
}

}  // namespace perfics
