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

#include "perfics/synthetic.hpp"

#include <fmt/format.h>

#include "json.hpp"
#include "perfics/hashing.hpp"

namespace perfics {

HttpResult SyntheticTransport::post(const std::string& /*path*/,
                                    const std::string& body,
                                    const std::map<std::string, std::string>&) {
  if (calls_) ++*calls_;
  nlohmann::json req;
  try {
    req = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    return {400, nlohmann::json{{"error", {{"message", e.what()}}}}.dump()};
  }
  const std::string model = req.value("model", std::string());
  std::string user;
  for (const auto& m : req.value("messages", nlohmann::json::array())) {
    if (m.value("role", std::string()) == "user") {
      user = m.value("content", std::string());
    }
  }
  const std::string digest = sha256_hex(model + "\n" + user);
  const auto byte = [&](int i) {
    return std::stoi(digest.substr(2 * static_cast<std::size_t>(i), 2), nullptr, 16);
  };

  std::string content;
  if (model == oracle_) {
    content = fmt::format("{} {}\nBoth answers address the question; details differ.",
                          4 + byte(0) % 7, 4 + byte(1) % 7);
  } else {
    content = fmt::format("{} says {}.", model, digest.substr(0, 12));
    for (int i = 0; i < byte(2) % 6; ++i) content += " More detail.";
  }
  const int prompt_tokens = static_cast<int>(user.size() / 4) + 1;
  const int completion_tokens = static_cast<int>(content.size() / 4) + 1;
  nlohmann::json out = {
      {"id", "synthetic-" + digest.substr(0, 8)},
      {"model", model},
      {"choices", {{{"index", 0},
                    {"message", {{"role", "assistant"}, {"content", content}}},
                    {"finish_reason", "stop"}}}},
      {"usage", {{"prompt_tokens", prompt_tokens},
                 {"completion_tokens", completion_tokens},
                 {"total_tokens", prompt_tokens + completion_tokens}}}};
  return {200, out.dump()};
}

}  // namespace perfics
