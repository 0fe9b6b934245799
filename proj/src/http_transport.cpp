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

#include "httplib.h"
#include "perfics/errors.hpp"
#include "perfics/gateway.hpp"

namespace perfics {
namespace {

class HttplibTransport : public Transport {
 public:
  HttplibTransport(const std::string& base_url, int timeout_ms)
      : client_(base_url) {
    const auto seconds = timeout_ms / 1000;
    const auto micros = (timeout_ms % 1000) * 1000;
    client_.set_connection_timeout(seconds, micros);
    client_.set_read_timeout(seconds, micros);
    client_.set_write_timeout(seconds, micros);
  }

  HttpResult post(const std::string& path, const std::string& body,
                  const std::map<std::string, std::string>& headers) override {
    httplib::Headers h;
    std::string content_type = "application/json";
    for (const auto& [k, v] : headers) {
      if (k == "Content-Type") {
        content_type = v;
      } else {
        h.emplace(k, v);
      }
    }
    auto res = client_.Post(path, h, body, content_type);
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::ConnectionTimeout ||
          err == httplib::Error::Read) {
        throw TimeoutError("request to " + path + " timed out (" +
                           httplib::to_string(err) + ")");
      }
      throw TransportError("request to " + path + " failed: " +
                           httplib::to_string(err));
    }
    return HttpResult{res->status, res->body};
  }

 private:
  httplib::Client client_;
};

}  // namespace

std::unique_ptr<Transport> make_http_transport(const std::string& base_url,
                                               int timeout_ms) {
  return std::make_unique<HttplibTransport>(base_url, timeout_ms);
}

}  // namespace perfics
