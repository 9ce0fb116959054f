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

#include <random>
#include <set>

#include "hql/ingredients.hpp"
#include "hql/smoothie.hpp"
#include "support.hpp"

using namespace hql;
using namespace hql::testing;

namespace {

Table one_cell(std::string v) {
  Table t;
  t.columns = {"value"};
  t.rows = {{Value{std::move(v)}}};
  return t;
}

std::string random_word(std::mt19937_64& rng) {
  static const char* kWords[] = {"alpha", "bravo", "charlie", "delta", "echo", "fox", "golf", "hotel",
                                 "india", "juliet", "kilo", "lima", "mike", "nov", "oscar"};
  return kWords[rng() % 15] + std::to_string(rng() % 50);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Config;
}

}  // namespace

TEST_CASE("team event map") {
  LookupBlender blender(nlohmann::json::parse(R"({"map": {"Is this a team event?":
      {"team event": true, "4x100 medley relay": true, "100m freestyle": false}}})"),
                        true);
  MapTask task{"Is this a team event?", {"team event", "4x100 medley relay", "100m freestyle"}, {HintKind::Boolean, "", kNoNode}, {}};
  MapResult r = exec_map(task, blender);
  CHECK(r.outputs == std::vector<Value>{std::int64_t{1}, std::int64_t{1}, std::int64_t{0}});
  CHECK(r.usage.calls == 1);
}

TEST_CASE("empty map makes no call") {
  FunctionBlender blender([](const BlenderRequest&) { return std::string("true;"); });
  MapResult r = exec_map(MapTask{"q", {}, {}, {}}, blender);
  CHECK(r.outputs.empty());
  CHECK(blender.calls() == 0);
}

TEST_CASE("example literal reaches the prompt") {
  // Echoes whatever the prompt offers as an example output.
  FunctionBlender blender([](const BlenderRequest& req) {
    const std::string key = "Here is an example output: ";
    auto at = req.user_prompt.find(key);
    if (at == std::string::npos) return std::string("?;");
    auto end = req.user_prompt.find('\n', at);
    return req.user_prompt.substr(at + key.size(), end - at - key.size()) + ";";
  });
  OutputHint hint{HintKind::ExampleLiteral, "CA", kNoNode};
  MapResult r = exec_map(MapTask{"What state is this city in?", {"san jose"}, hint, {}}, blender);
  CHECK(r.outputs == std::vector<Value>{Value{std::string("CA")}});
}

TEST_CASE("map keeps length and order") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 100; ++round) {
    nlohmann::json answers = nlohmann::json::object();
    std::vector<std::string> values;
    std::set<std::string> seen;
    int n = static_cast<int>(rng() % 23);
    for (int i = 0; i < n; ++i) {
      std::string v = random_word(rng);
      if (!seen.insert(v).second) continue;
      values.push_back(v);
      answers[v] = "out-" + v;
    }
    LookupBlender blender(nlohmann::json{{"map", {{"q", answers}}}}, true);
    IngredientConfig cfg;
    cfg.batch_size = 1 + rng() % 6;
    cfg.parallel = round % 2 == 0;
    MapResult r = exec_map(MapTask{"q", values, {}, {}}, blender, cfg);
    REQUIRE(r.outputs.size() == values.size());
    for (std::size_t i = 0; i < values.size(); ++i) CHECK(to_text(r.outputs[i]) == "out-" + values[i]);
  }
}

TEST_CASE("a bad batch yields NULL unless strict") {
  FunctionBlender blender([](const BlenderRequest&) { return std::string("maybe;"); });
  MapTask task{"q", {"a", "b"}, {HintKind::Boolean, "", kNoNode}, {}};
  MapResult r = exec_map(task, blender);
  CHECK(is_null(r.outputs[0]));
  CHECK(is_null(r.outputs[1]));
  CHECK_FALSE(r.warnings.empty());
  IngredientConfig strict;
  strict.strict = true;
  CHECK_THROWS(exec_map(task, blender, strict));
}

TEST_CASE("QA") {
  SECTION("NBA season from the documents") {
    Database db = fixture_db("nba");
    Table ctx = bm25_search(db, "nba OR covid", 1);
    LookupBlender blender(read_json(data_path("fixtures/nba/blender.json")), true);
    QaResult r = exec_qa(QaTask{"Which NBA season was suspended due to COVID-19?", ctx, {"2018-19", "2019-20", "2020-21"}},
                         blender);
    CHECK(r.answer == "2019-20");
  }
  SECTION("a single option needs no model") {
    FunctionBlender blender([](const BlenderRequest&) { return std::string("anything"); });
    CHECK(exec_qa(QaTask{"q", one_cell("ctx"), {"only"}}, blender).answer == "only");
    CHECK(blender.calls() == 0);
  }
  SECTION("1x1 table") {
    LookupBlender blender(nlohmann::json::object());
    CHECK(exec_qa(QaTask{"What is the value?", one_cell("42"), {}}, blender).answer == "42");
  }
  SECTION("empty context") {
    LookupBlender blender(nlohmann::json::object());
    Table empty;
    empty.columns = {"value"};
    CHECK(code_of([&] { exec_qa(QaTask{"q", empty, {}}, blender); }) == ErrorCode::EmptyContext);
  }
  SECTION("non-member output is retried then rejected") {
    FunctionBlender blender([](const BlenderRequest&) { return std::string("2022-23"); });
    CHECK(code_of([&] { exec_qa(QaTask{"q", one_cell("x"), {"2018-19", "2019-20"}}, blender); }) ==
          ErrorCode::ConstraintViolation);
    CHECK(blender.calls() == 2);
  }
}

TEST_CASE("QA answers stay inside the options") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 100; ++round) {
    std::vector<std::string> options;
    int n = 2 + static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) options.push_back(random_word(rng));
    std::string reply = rng() % 2 ? options[rng() % options.size()] : random_word(rng);
    if (rng() % 3 == 0) reply = "  " + to_lower(reply) + ".";
    FunctionBlender blender([reply](const BlenderRequest&) { return reply; });
    try {
      QaResult r = exec_qa(QaTask{"q", one_cell("ctx"), options}, blender);
      CHECK(std::find(options.begin(), options.end(), r.answer) != options.end());
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConstraintViolation);
    }
  }
}

TEST_CASE("join") {
  SECTION("same referent") {
    LookupBlender blender(read_json(data_path("fixtures/mariners/blender.json")), true);
    JoinResult r = exec_join(JoinTask{"", {"joshua fields", "dennis raben"}, {"josh fields (pitcher)", "kenn kasparek"}},
                             blender);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0] == std::pair<std::string, std::string>{"joshua fields", "josh fields (pitcher)"});
  }
  SECTION("exact matches skip the model") {
    FunctionBlender blender([](const BlenderRequest&) { return std::string("NONE;"); });
    JoinResult r = exec_join(JoinTask{"", {"a", "b"}, {"a", "b"}}, blender);
    CHECK(r.pairs.size() == 2);
    CHECK(r.exact_matches == 2);
    CHECK(blender.calls() == 0);
  }
  SECTION("no alignment gives an empty inner join") {
    LookupBlender blender(nlohmann::json{{"join", nlohmann::json::object()}}, true);
    JoinResult r = exec_join(JoinTask{"", {"x"}, {"y"}}, blender);
    CHECK(r.pairs.empty());
    Database db = Database::open_memory();
    db.exec("CREATE TABLE l (v TEXT); INSERT INTO l VALUES ('x');"
            "CREATE TABLE r (v TEXT); INSERT INTO r VALUES ('y');"
            "CREATE TABLE pairs (left TEXT, right TEXT)");
    CHECK(db.query("SELECT * FROM l JOIN pairs ON pairs.left = l.v JOIN r ON r.v = pairs.right").empty());
  }
}

TEST_CASE("join pairs come from the cross product") {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 50; ++round) {
    std::vector<std::string> left;
    std::vector<std::string> right;
    for (int i = 0; i < 1 + static_cast<int>(rng() % 8); ++i) left.push_back(random_word(rng));
    for (int i = 0; i < 1 + static_cast<int>(rng() % 8); ++i) right.push_back(random_word(rng));
    // Replies with an arbitrary option, an invented string or the sentinel.
    FunctionBlender blender([&rng](const BlenderRequest& req) {
      std::string out;
      for (std::size_t i = 0; i < req.task->items.size(); ++i) {
        auto pick = rng() % 3;
        if (pick == 0) out += req.task->options[rng() % req.task->options.size()];
        else if (pick == 1) out += "made up";
        else out += req.task->none_token;
        out += ";";
      }
      return out;
    });
    JoinResult r;
    try {
      r = exec_join(JoinTask{"q", left, right}, blender);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConstraintViolation);
      continue;
    }
    for (const auto& [l, rv] : r.pairs) {
      CHECK(std::find(left.begin(), left.end(), l) != left.end());
      CHECK(std::find(right.begin(), right.end(), rv) != right.end());
    }
  }
}

TEST_CASE("validate") {
  SECTION("claim equal to a cell") {
    LookupBlender blender(nlohmann::json::object());
    CHECK(exec_validate(ValidateTask{"Does the table state samoa?", one_cell("samoa")}, blender).verdict);
  }
  SECTION("empty context") {
    LookupBlender blender(nlohmann::json::object());
    Table empty;
    empty.columns = {"title"};
    CHECK(code_of([&] { exec_validate(ValidateTask{"c", empty}, blender); }) == ErrorCode::EmptyContext);
  }
  SECTION("only true or false come back") {
    for (std::string reply : {"true;", "false;", "TRUE;", "yes;", "true;false;", ""}) {
      FunctionBlender blender([reply](const BlenderRequest&) { return reply; });
      try {
        ValidateResult r = exec_validate(ValidateTask{"c", one_cell("x")}, blender);
        CHECK(r.verdict == (to_lower(reply) == "true;"));
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConstraintViolation);
      }
    }
  }
}

TEST_CASE("custom ingredients") {
  IngredientRegistry reg;
  ScalarHandler upper = [](const std::string&, const std::vector<std::string>& values, Blender&) {
    std::vector<Value> out;
    for (auto v : values) {
      for (auto& c : v) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      out.emplace_back(v);
    }
    return out;
  };

  SECTION("built-in names are taken") {
    CHECK(code_of([&] { reg.register_custom("LLMMap", CustomClass::Scalar, upper); }) == ErrorCode::DuplicateName);
    reg.register_custom("UPPERX", CustomClass::Scalar, upper);
    CHECK(code_of([&] { reg.register_custom("upperx", CustomClass::Scalar, upper); }) == ErrorCode::DuplicateName);
  }

  SECTION("scalar handler agrees with SQL UPPER") {
    reg.register_custom("UPPERX", CustomClass::Scalar, upper);
    Database db = fixture_db("mariners");
    auto blender = constant_blender();
    ExecuteOptions opts;
    opts.registry = &reg;
    Smoothie s = execute(db, parse_query("SELECT {{UPPERX('upper case', 'w::name')}} FROM w ORDER BY name", &reg),
                         *blender, opts);
    CHECK(s.result.rows == db.query("SELECT UPPER(name) FROM w ORDER BY name").rows);
  }

  SECTION("aggregate stub") {
    std::size_t seen_rows = 0;
    reg.register_custom("VQA", CustomClass::Aggregate,
                        AggregateHandler([&](const std::string&, const Table& ctx, const std::vector<std::string>&,
                                             Blender&) {
                          seen_rows = ctx.row_count();
                          return Value{std::string("a dog")};
                        }));
    Database db = fixture_db("mariners");
    auto blender = constant_blender();
    ExecuteOptions opts;
    opts.registry = &reg;
    auto ast = parse_query(
        "SELECT {{VQA('What is in this image?', (SELECT name FROM w WHERE school = 'university of georgia'))}} AS a",
        &reg);
    Smoothie s = execute(db, ast, *blender, opts);
    REQUIRE(s.result.rows.size() == 1);
    CHECK(to_text(s.result.rows[0][0]) == "a dog");
    CHECK(seen_rows == 1);
  }
}
