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

#include <set>

#include "hql/planner.hpp"
#include "hql/smoothie.hpp"
#include "support.hpp"

using namespace hql;
using namespace hql::testing;

namespace {

std::int64_t count_rows(const Database& db, const std::string& sql) {
  return std::get<std::int64_t>(db.query("SELECT COUNT(*) FROM (" + sql + ")").rows.at(0).at(0));
}

const IngredientCall& first_call(const QueryAst& ast) {
  REQUIRE_FALSE(ast.ingredients().empty());
  return ast.ingredients().front();
}

// Answers every Map value from a fixed table; used as the brute-force reference.
std::shared_ptr<FunctionBlender> warm_blender(std::set<std::string> yes) {
  return std::make_shared<FunctionBlender>([yes](const BlenderRequest& req) {
    std::string out;
    for (const auto& item : req.task->items) out += yes.count(item) ? "true;" : "false;";
    return out;
  });
}

}  // namespace

TEST_CASE("mariners plan filters on school first") {
  Database db = fixture_db("mariners");
  auto ast = parse_query(fixture_query("mariners"));
  ExecutionPlan p = plan(ast, db.schema());
  REQUIRE(p.steps.size() >= 2);
  CHECK(p.steps.front().kind == StepKind::NativeSubquery);
  CHECK(p.steps.front().sql.find("school = 'university of georgia'") != std::string::npos);
  CHECK(p.steps.back().kind == StepKind::FinalQuery);
  CHECK(p.to_json()["steps"].size() == p.steps.size());
}

TEST_CASE("plain SQL plans to one final step") {
  Database db = Database::open_memory();
  ExecutionPlan p = plan(parse_query("SELECT 1"), db.schema());
  REQUIRE(p.steps.size() == 1);
  CHECK(p.steps[0].kind == StepKind::FinalQuery);
}

TEST_CASE("unknown columns fail at plan time") {
  Database db = fixture_db("mariners");
  auto ast = parse_query("SELECT * FROM w WHERE {{LLMMap('q', 'w::height')}} = TRUE");
  try {
    plan(ast, db.schema());
    FAIL("expected a plan error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Plan);
  }
}

TEST_CASE("push-down over the mariners table") {
  Database db = fixture_db("mariners");
  auto schema = db.schema();

  SECTION("school predicate leaves one row") {
    auto ast = parse_query("SELECT * FROM w WHERE school = 'university of georgia' AND {{LLMMap('q', 'w::name')}} = TRUE");
    PushdownQuery q = pushdown_predicates(ast, first_call(ast), schema);
    Table t = db.query(q.sql);
    REQUIRE(t.row_count() == 1);
    CHECK(to_text(t.rows[0][0]) == "joshua fields");
    CHECK(q.pushed.size() == 1);
  }
  SECTION("no predicates gives the bare column") {
    auto ast = parse_query("SELECT * FROM w WHERE {{LLMMap('q', 'w::name')}} = TRUE");
    PushdownQuery q = pushdown_predicates(ast, first_call(ast), schema);
    CHECK(q.pushed.empty());
    CHECK(db.query(q.sql).rows == db.query("SELECT name FROM w").rows);
  }
  SECTION("a disjunction keeps every row") {
    auto ast = parse_query("SELECT * FROM w WHERE school = 'university of georgia' OR {{LLMMap('q', 'w::name')}} = TRUE");
    PushdownQuery q = pushdown_predicates(ast, first_call(ast), schema);
    CHECK(q.pushed.empty());
    CHECK(count_rows(db, q.sql) == 3);
  }
  SECTION("push-down switched off") {
    auto ast = parse_query("SELECT * FROM w WHERE school = 'university of georgia' AND {{LLMMap('q', 'w::name')}} = TRUE");
    PlanOptions off;
    off.pushdown = false;
    CHECK(count_rows(db, pushdown_predicates(ast, first_call(ast), schema, off).sql) == 3);
  }
}

TEST_CASE("push-down on a 1000-row table matches a direct count") {
  Database db = Database::open_memory();
  make_events(db, 1000, 100);
  auto ast = parse_query(
      "SELECT id FROM events WHERE category = 'rare' AND {{LLMMap('Is this a team event?', 'events::description')}} = TRUE");
  PushdownQuery q = pushdown_predicates(ast, first_call(ast), db.schema());
  std::int64_t oracle = count_rows(db, "SELECT * FROM events WHERE category = 'rare'");
  CHECK(oracle == 10);
  CHECK(count_rows(db, q.sql) == oracle);
}

TEST_CASE("disjunction result matches a brute-force run") {
  Database db = fixture_db("mariners");
  auto blender = warm_blender({"dennis raben"});
  std::string q = "SELECT name FROM w WHERE school = 'university of georgia' OR {{LLMMap('q', 'w::name')}} = TRUE ORDER BY name";
  Smoothie s = execute(db, q, *blender);
  CHECK(s.totals.values_passed == 3);
  // Oracle: answer every row by hand, then filter in plain SQL.
  Table oracle = db.query("SELECT name FROM w WHERE school = 'university of georgia' OR name = 'dennis raben' ORDER BY name");
  CHECK(s.result.rows == oracle.rows);
}

TEST_CASE("session tables") {
  Database db = fixture_db("mariners");
  SECTION("one-row subset") {
    SessionScope scope(db);
    SessionTable t = scope.materialize("SELECT * FROM w WHERE school = 'university of georgia'");
    CHECK(t.row_count == 1);
  }
  SECTION("empty subset is fine") {
    SessionScope scope(db);
    SessionTable t = scope.materialize("SELECT * FROM w WHERE school = 'nowhere'");
    CHECK(t.row_count == 0);
  }
  SECTION("repeated materialization never collides") {
    std::string a;
    std::string b;
    {
      SessionScope scope(db);
      a = scope.materialize("SELECT name FROM w").name;
      b = scope.materialize("SELECT name FROM w").name;
      CHECK(a != b);
      CHECK(count_rows(db, "SELECT * FROM " + quote_ident(a)) == 3);
      CHECK(count_rows(db, "SELECT * FROM " + quote_ident(b)) == 3);
    }
    CHECK(db.temp_tables().empty());
  }
  SECTION("bad SQL is a storage error") {
    SessionScope scope(db);
    try {
      scope.materialize("SELECT nope FROM w");
      FAIL("expected a storage error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Storage);
    }
  }
}

TEST_CASE("substitution") {
  SECTION("artifact kind must match") {
    auto ast = parse_query("SELECT * FROM w WHERE {{LLMMap('q', 'w::name')}} = TRUE");
    try {
      substitute(ast, first_call(ast), VerdictArtifact{true});
      FAIL("expected TypeMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TypeMismatch);
    }
  }
  SECTION("QA becomes a literal") {
    auto ast = parse_query(
        "SELECT * FROM w WHERE year = {{LLMQA('Which NBA season was suspended due to COVID-19?', options='w::year')}}");
    QueryAst out = substitute(ast, first_call(ast), ScalarArtifact{Value{std::string("2019-20")}});
    CHECK(out.ingredients().empty());
    CHECK(out.text() == "SELECT * FROM w WHERE year = '2019-20'");
  }
  SECTION("map becomes a session lookup") {
    auto ast = parse_query("SELECT * FROM w WHERE {{LLMMap('q', 'w::name')}} = TRUE");
    QueryAst out = substitute(ast, first_call(ast), MapArtifact{"__hql_map_0", "w", "name"});
    CHECK(out.text().find("\"__hql_map_0\"") != std::string::npos);
    CHECK(out.text().find("{{") == std::string::npos);
  }
  SECTION("false verdict passes through") {
    Database db = Database::open_memory();
    auto ast = parse_query("SELECT {{LLMValidate('q', (SELECT 1))}} AS verdict");
    QueryAst out = substitute(ast, first_call(ast), VerdictArtifact{false});
    Table t = db.query(out.text());
    CHECK(std::get<std::int64_t>(t.rows.at(0).at(0)) == 0);
  }
}

TEST_CASE("execute SELECT 1") {
  Database db = Database::open_memory();
  auto blender = constant_blender();
  Smoothie s = execute(db, "SELECT 1", *blender);
  REQUIRE(s.result.rows.size() == 1);
  CHECK(std::get<std::int64_t>(s.result.rows[0][0]) == 1);
  CHECK(s.totals.ingredient_calls == 0);
  CHECK(s.outcome == Outcome::Answered);
}

TEST_CASE("NBA question returns the season") {
  Database db = fixture_db("nba");
  auto blender = fixture_blender("nba");
  Smoothie s = execute(db, fixture_query("nba"), *blender);
  REQUIRE(s.result.rows.size() == 1);
  auto year = std::find(s.result.columns.begin(), s.result.columns.end(), "year") - s.result.columns.begin();
  CHECK(to_text(s.result.rows[0].at(year)) == "2019-20");
}

TEST_CASE("pesamino verdict matches hand evaluation") {
  Database db = fixture_db("pesamino");
  auto blender = fixture_blender("pesamino");
  Smoothie s = execute(db, fixture_query("pesamino"), *blender);
  // Validate is true and no score is a win, so the conjunction holds.
  REQUIRE(s.result.rows.size() == 1);
  CHECK(std::get<std::int64_t>(s.result.rows[0][0]) == 1);
}

TEST_CASE("trace and totals") {
  Database db = fixture_db("mariners");
  auto blender = fixture_blender("mariners");
  Smoothie s = execute(db, fixture_query("mariners"), *blender);
  auto p = plan(parse_query(fixture_query("mariners")), db.schema());
  std::size_t ingredient_steps = 0;
  std::size_t values = 0;
  std::size_t chars = 0;
  for (const auto& e : s.steps) {
    values += e.values_passed;
    chars += e.prompt_chars;
    if (e.kind == StepKind::Ingredient) ++ingredient_steps;
  }
  CHECK(ingredient_steps == 2);
  CHECK(s.totals.values_passed == values);
  CHECK(s.totals.prompt_chars == chars);
  CHECK(s.steps.back().kind == StepKind::FinalQuery);
  CHECK(s.steps.size() >= p.steps.size());
  CHECK(db.temp_tables().empty());
  auto j = s.to_json(false);
  CHECK(j["steps"].size() == s.steps.size());
  CHECK_FALSE(j["steps"][0].contains("wall_ms"));
}

TEST_CASE("temp tables are dropped when a step fails") {
  Database db = fixture_db("mariners");
  auto failing = std::make_shared<FunctionBlender>([](const BlenderRequest&) -> std::string {
    throw Error(ErrorCode::Transport, "down");
  });
  ExecuteOptions strict;
  strict.ingredients.strict = true;
  CHECK_THROWS_AS(execute(db, fixture_query("mariners"), *failing, strict), ExecutionError);
  CHECK(db.temp_tables().empty());
  CHECK_THROWS(execute(db, "SELECT * FROM w WHERE {{LLMMap('q', 'w::name')}} = TRUE AND nope = 1", *failing, strict));
  CHECK(db.temp_tables().empty());
}

TEST_CASE("repeated calls hit the cache") {
  Database db = fixture_db("mariners");
  auto blender = warm_blender({"joshua fields"});
  std::string q = "SELECT name FROM w WHERE {{LLMMap('q', 'w::name')}} = TRUE AND {{LLMMap('q', 'w::name')}} = TRUE";
  Smoothie cached = execute(db, q, *blender);
  std::size_t with_cache = blender->calls();
  ExecuteOptions off;
  off.cache = false;
  Smoothie uncached = execute(db, q, *blender, off);
  CHECK(blender->calls() - with_cache > with_cache);
  CHECK(cached.result == uncached.result);
}

TEST_CASE("map skips NULL values") {
  Database db = Database::open_memory();
  db.exec("CREATE TABLE t (x TEXT); INSERT INTO t VALUES ('a'), (NULL), ('b'), ('a')");
  auto inner = warm_blender({"a"});
  CountingBlender counting(*inner);
  Smoothie s = execute(db, "SELECT x FROM t WHERE {{LLMMap('q', 't::x')}} = TRUE", counting);
  CHECK(s.totals.values_passed == 2);
  REQUIRE(s.result.rows.size() == 2);
  for (const auto& row : s.result.rows) CHECK(to_text(row[0]) == "a");
  for (const auto& prompt : counting.prompts()) CHECK(prompt.find("NULL") == std::string::npos);
}

TEST_CASE("an empty QA context is reported as no result") {
  Database db = fixture_db("nba");
  auto blender = constant_blender("2019-20");
  Smoothie s = execute(db,
                       "SELECT {{LLMQA('q', (SELECT title FROM documents WHERE documents MATCH 'zzzzqq'))}}",
                       *blender);
  CHECK(s.outcome == Outcome::NoResult);
  CHECK_FALSE(s.reason.empty());
}
