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


#include <catch_amalgamated.hpp>

#include <httplib.h>

#include <thread>

#include "hql/blender.hpp"
#include "hql/ingredients.hpp"
#include "support.hpp"

using namespace hql;
using namespace hql::testing;

namespace {

BlenderRequest prompt(std::string system, std::string user) {
  BlenderRequest r;
  r.system_prompt = std::move(system);
  r.user_prompt = std::move(user);
  return r;
}

// Serves one canned chat-completions response on a random local port.
class LocalServer {
 public:
  LocalServer(int status, std::string body) {
    server_.Post("/v1/chat/completions", [this, status, body](const httplib::Request& req, httplib::Response& res) {
      last_body_ = req.body;
      last_auth_ = req.get_header_value("Authorization");
      res.status = status;
      res.set_content(body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  std::string last_body_;
  std::string last_auth_;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("lookup by prompt hash") {
  BlenderRequest req = prompt("sys", "Which NBA season was suspended due to COVID-19?");
  nlohmann::json fixture{{"prompts", {{prompt_hash(req.system_prompt, req.user_prompt), "2019-20"}}}};
  LookupBlender blender(fixture, true);
  CHECK(blender.complete(req).text == "2019-20");
  CHECK(blender.complete(req).text == "2019-20");
  CHECK(blender.calls() == 2);
  try {
    blender.complete(prompt("sys", "something else"));
    FAIL("expected NoMatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoMatch);
  }
}

TEST_CASE("lenient lookup falls back to the default") {
  LookupBlender blender(nlohmann::json{{"default", "n/a"}});
  CHECK(blender.complete(prompt("a", "b")).text == "n/a");
}

TEST_CASE("echo blender returns the first option") {
  ConstraintEchoBlender blender;
  BlenderRequest req = prompt("s", "u");
  req.constraint = Constraint::value_set({"2018-19", "2019-20", "2020-21"});
  BlenderResponse r = blender.complete(req);
  CHECK(r.text == "2018-19");
  CHECK(r.constrained);
}

TEST_CASE("constrained completion") {
  SECTION("value set membership") {
    FunctionBlender blender([](const BlenderRequest&) { return std::string(" 2019-20 "); });
    BlenderRequest req = prompt("s", "u");
    req.constraint = Constraint::value_set({"2018-19", "2019-20", "2020-21"});
    CHECK(complete_constrained(blender, req).text == "2019-20");
  }
  SECTION("single option") {
    ConstraintEchoBlender blender;
    BlenderRequest req = prompt("s", "u");
    req.constraint = Constraint::value_set({"only"});
    CHECK(complete_constrained(blender, req).text == "only");
  }
  SECTION("boolean batch regex") {
    FunctionBlender blender([](const BlenderRequest&) { return std::string("true;true;false;"); });
    BlenderRequest req = prompt("s", "u");
    req.constraint = Constraint::regex(kBooleanBatchPattern);
    CHECK(complete_constrained(blender, req).text == "true;true;false;");
  }
  SECTION("retry once then give up") {
    int calls = 0;
    FunctionBlender blender([&calls](const BlenderRequest& req) {
      ++calls;
      // The retry prompt quotes the rejected answer.
      if (calls == 2) CHECK(req.user_prompt.find("maybe") != std::string::npos);
      return std::string("maybe;");
    });
    BlenderRequest req = prompt("s", "u");
    req.constraint = Constraint::regex(kBooleanBatchPattern);
    try {
      complete_constrained(blender, req);
      FAIL("expected ConstraintViolation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConstraintViolation);
    }
    CHECK(calls == 2);
  }
  SECTION("second try can succeed") {
    int calls = 0;
    FunctionBlender blender([&calls](const BlenderRequest&) { return std::string(++calls == 1 ? "nope" : "b"); });
    BlenderRequest req = prompt("s", "u");
    req.constraint = Constraint::value_set({"a", "b"});
    CHECK(complete_constrained(blender, req).text == "b");
  }
}

TEST_CASE("regex matching is anchored") {
  CHECK(regex_full_match(kBooleanBatchPattern, "true;"));
  CHECK(regex_full_match(kBooleanBatchPattern, "false;true;"));
  CHECK_FALSE(regex_full_match(kBooleanBatchPattern, "true"));
  CHECK_FALSE(regex_full_match(kBooleanBatchPattern, "true;x"));
  CHECK_FALSE(regex_full_match(kBooleanBatchPattern, ""));
}

TEST_CASE("option matching") {
  std::vector<std::string> options{"2019-20", "Boston Red Sox"};
  CHECK(match_option("2019-20", options) == "2019-20");
  CHECK(match_option("  boston  RED sox ", options) == "Boston Red Sox");
  CHECK_FALSE(match_option("2019", options));
  CHECK_FALSE(match_option("boston red sox.", options));
}

TEST_CASE("prompt hash") {
  CHECK(prompt_hash("a", "b") == prompt_hash("a", "b"));
  CHECK(prompt_hash("a", "b") != prompt_hash("b", "a"));
  CHECK(prompt_hash("ab", "") != prompt_hash("a", "b"));
  CHECK(prompt_hash("a", "b").size() == 64);
}

TEST_CASE("usage counts prompt characters") {
  FunctionBlender blender([](const BlenderRequest&) { return std::string("xyz"); });
  BlenderResponse r = blender.complete(prompt("12345", "678"));
  CHECK(r.usage.prompt_chars == 8);
  CHECK(r.usage.output_chars == 3);
  CHECK(r.usage.calls == 1);
}

TEST_CASE("remote blender against a local server") {
  std::string cassette = read_file(data_path("fixtures/cassettes/chat_completion.json"));
  LocalServer server(200, cassette);
  RemoteConfig cfg;
  cfg.base_url = server.url();
  cfg.api_key = "test-key";
  cfg.timeout = std::chrono::milliseconds(5000);
  RemoteBlender blender(cfg);
  BlenderRequest req = prompt("system text", "Which NBA season was suspended due to COVID-19?");
  BlenderResponse r = blender.complete(req);
  CHECK(r.text == "2019-20");
  CHECK(r.usage.prompt_chars == req.prompt_chars());

  auto sent = nlohmann::json::parse(server.last_body_);
  CHECK(sent == blender.request_body(req));
  CHECK(sent["model"] == "gpt-4-0613");
  CHECK(sent["temperature"] == 0.0);
  REQUIRE(sent["messages"].size() == 2);
  CHECK(sent["messages"][0]["role"] == "system");
  CHECK(sent["messages"][1]["content"] == req.user_prompt);
  CHECK(server.last_auth_ == "Bearer test-key");
}

TEST_CASE("remote errors") {
  SECTION("rate limit") {
    LocalServer server(429, "{}");
    RemoteConfig cfg;
    cfg.base_url = server.url();
    RemoteBlender blender(cfg);
    try {
      blender.complete(prompt("s", "u"));
      FAIL("expected RateLimit");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RateLimit);
    }
  }
  SECTION("malformed body") {
    LocalServer server(200, "{\"choices\": []}");
    RemoteConfig cfg;
    cfg.base_url = server.url();
    RemoteBlender blender(cfg);
    try {
      blender.complete(prompt("s", "u"));
      FAIL("expected Transport");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Transport);
    }
  }
}

TEST_CASE("blender specs") {
  CHECK(make_blender("echo")->name() == "echo");
  CHECK(make_blender("lookup:" + data_path("fixtures/nba/blender.json"))->name() == "lookup");
  CHECK_THROWS_AS(make_blender("bogus"), Error);
}
