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

#ifndef PERFICS_SYNTHETIC_HPP_
#define PERFICS_SYNTHETIC_HPP_

#include <atomic>
#include <memory>
#include <string>

#include "perfics/gateway.hpp"

namespace perfics {

// Offline stand-in for a chat-completion server. Answers are a pure function
// of the request body. Requests addressed to `oracle_model` get a
// "<score> <score>\n<explanation>" verdict.
class SyntheticTransport : public Transport {
 public:
  explicit SyntheticTransport(std::string oracle_model,
                              std::shared_ptr<std::atomic<int>> calls = nullptr)
      : oracle_(std::move(oracle_model)), calls_(std::move(calls)) {}

  HttpResult post(const std::string& path, const std::string& body,
                  const std::map<std::string, std::string>& headers) override;

 private:
  std::string oracle_;
  std::shared_ptr<std::atomic<int>> calls_;
};

// Counts calls before delegating.
class CountingBackend : public Backend {
 public:
  CountingBackend(std::shared_ptr<Backend> inner,
                  std::shared_ptr<std::atomic<int>> calls)
      : inner_(std::move(inner)), calls_(std::move(calls)) {}

  CompletionResponse complete(const CompletionRequest& req) override {
    ++*calls_;
    return inner_->complete(req);
  }
  std::string id() const override { return inner_->id(); }

 private:
  std::shared_ptr<Backend> inner_;
  std::shared_ptr<std::atomic<int>> calls_;
};

}  // namespace perfics

#endif  // PERFICS_SYNTHETIC_HPP_
