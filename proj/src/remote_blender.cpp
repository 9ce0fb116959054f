// Copyright 2026 The HQL Authors
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

#include <httplib.h>

#include <algorithm>
#include <cstdlib>

#include "hql/blender.hpp"

namespace hql {

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix without trailing slash
};

Endpoint split_url(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error(ErrorCode::Config, "base URL needs a scheme: " + url);
  auto slash = url.find('/', scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, slash);
  e.path = slash == std::string::npos ? "" : url.substr(slash);
  while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
  return e;
}

class SemaphoreSlot {
 public:
  explicit SemaphoreSlot(std::counting_semaphore<64>& s) : s_(s) { s_.acquire(); }
  ~SemaphoreSlot() { s_.release(); }
  SemaphoreSlot(const SemaphoreSlot&) = delete;
  SemaphoreSlot& operator=(const SemaphoreSlot&) = delete;

 private:
  std::counting_semaphore<64>& s_;
};

}  // namespace

RemoteConfig RemoteConfig::from_env() {
  RemoteConfig c;
  c.api_key = env_or("HQL_API_KEY", env_or("OPENAI_API_KEY", ""));
  c.base_url = env_or("HQL_BASE_URL", c.base_url);
  c.model = env_or("HQL_MODEL", c.model);
  return c;
}

RemoteBlender::RemoteBlender(RemoteConfig config) : config_(std::move(config)) {
  split_url(config_.base_url);
  int limit = std::clamp(config_.max_in_flight, 1, 64);
  in_flight_ = std::make_unique<std::counting_semaphore<64>>(limit);
}

nlohmann::json RemoteBlender::request_body(const BlenderRequest& req) const {
  nlohmann::json body;
  body["model"] = config_.model;
  body["messages"] = nlohmann::json::array({
      {{"role", "system"}, {"content", req.system_prompt}},
      {{"role", "user"}, {"content", req.user_prompt}},
  });
  body["temperature"] = req.temperature;
  if (req.max_output > 0) body["max_tokens"] = req.max_output;
  return body;
}

BlenderResponse RemoteBlender::complete(const BlenderRequest& req) {
  Endpoint ep = split_url(config_.base_url);
  httplib::Client client(ep.origin);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count();
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout).count() % 1000000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string body = request_body(req).dump();
  httplib::Result res;
  {
    SemaphoreSlot slot(*in_flight_);
    res = client.Post(ep.path + "/chat/completions", headers, body, "application/json");
  }
  if (!res) {
    auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
        err == httplib::Error::Write) {
      throw Error(ErrorCode::Timeout, "request to " + ep.origin + " timed out or was cut off: " +
                                          httplib::to_string(err));
    }
    throw Error(ErrorCode::Transport, "request to " + ep.origin + " failed: " + httplib::to_string(err));
  }
  if (res->status == 429) throw Error(ErrorCode::RateLimit, "rate limited by " + ep.origin);
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::Transport, "HTTP " + std::to_string(res->status) + " from " + ep.origin +
                                          ": " + res->body.substr(0, 200));
  }
  BlenderResponse out;
  try {
    auto j = nlohmann::json::parse(res->body);
    out.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Transport, std::string("malformed chat-completions response: ") + e.what());
  }
  out.usage = {req.prompt_chars(), out.text.size(), 1};
  return out;
}

}  // namespace hql
