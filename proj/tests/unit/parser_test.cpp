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

#include "hql/ast.hpp"
#include "hql/ingredients.hpp"
#include "hql/storage.hpp"
#include "support.hpp"

using namespace hql;
using hql::testing::squash_ws;

namespace {

const IngredientCall& only_call(const QueryAst& ast) {
  REQUIRE(ast.ingredients().size() == 1);
  return ast.ingredients().front();
}

std::vector<IngredientKind> kinds(const QueryAst& ast) {
  std::vector<IngredientKind> out;
  for (const auto& c : ast.ingredients()) out.push_back(c.kind);
  return out;
}

// QA wrapped around QA ... around a Map, `depth` levels of QA.
std::string nested_query(int depth) {
  std::string q = "SELECT x FROM t WHERE {{LLMMap('m', 't::x')}} = 'a'";
  for (int i = 0; i < depth; ++i) {
    q = "SELECT x FROM t WHERE x = {{LLMQA('q" + std::to_string(i) + "', (" + q + "))}}";
  }
  return q;
}

}  // namespace

TEST_CASE("team event map sits in a comparison") {
  auto ast = parse_query("SELECT * FROM w WHERE {{LLMMap('Is this a team event?', 'w::event')}} = TRUE");
  const auto& call = only_call(ast);
  CHECK(call.kind == IngredientKind::Map);
  CHECK(call.context == SyntacticContext::ComparisonOperand);
  CHECK(call.question == "Is this a team event?");
  REQUIRE(call.target_column);
  CHECK(call.target_column->table == "w");
  CHECK(call.target_column->column == "event");
  CHECK(ast.source(call.node) == "{{LLMMap('Is this a team event?', 'w::event')}}");
}

TEST_CASE("plain SQL has no ingredients") {
  auto ast = parse_query("SELECT 1");
  CHECK(ast.ingredients().empty());
  CHECK(extract_ingredients(ast).empty());
  CHECK(render_native(ast, {}) == "SELECT 1");
}

TEST_CASE("mariners query nests a documents subquery in the QA context") {
  auto ast = parse_query(hql::testing::fixture_query("mariners"));
  REQUIRE(kinds(ast) == std::vector<IngredientKind>{IngredientKind::Join, IngredientKind::QA});
  const auto& qa = ast.ingredients()[1];
  REQUIRE(qa.context_subquery != kNoNode);
  std::string ctx(ast.source(qa.context_subquery));
  CHECK(ctx.find("FROM documents") != std::string::npos);
  // The join lives inside the QA context, so it comes first.
  CHECK(ast.is_within(ast.ingredients()[0].node, qa.context_subquery));
}

TEST_CASE("nested calls come back innermost first") {
  auto ast = parse_query(
      "SELECT {{LLMQA('q', (SELECT x FROM t WHERE {{LLMMap('m', 't::x')}} = 'a'))}}");
  CHECK(kinds(ast) == std::vector<IngredientKind>{IngredientKind::Map, IngredientKind::QA});
}

TEST_CASE("nesting depth property") {
  for (int depth = 0; depth <= 6; ++depth) {
    auto ast = parse_query(nested_query(depth));
    const auto& calls = ast.ingredients();
    REQUIRE(calls.size() == static_cast<std::size_t>(depth + 1));
    CHECK(calls.front().kind == IngredientKind::Map);
    for (std::size_t i = 0; i < calls.size(); ++i) {
      for (std::size_t j = i + 1; j < calls.size(); ++j) {
        // Every later call encloses every earlier one.
        CHECK(ast.is_within(calls[i].node, calls[j].node));
        CHECK_FALSE(ast.is_within(calls[j].node, calls[i].node));
      }
    }
    CHECK(render(ast, {}) == nested_query(depth));
  }
}

TEST_CASE("output hints") {
  SECTION("literal operand") {
    auto ast = parse_query("SELECT * FROM w WHERE {{LLMMap('What state is this city in?','w::city')}} = 'CA'");
    OutputHint h = infer_output_hint(ast, only_call(ast));
    CHECK(h.kind == HintKind::ExampleLiteral);
    CHECK(h.example == "CA");
    REQUIRE(h.source_node != kNoNode);
    CHECK(ast.source(h.source_node) == "'CA'");
  }
  SECTION("boolean operand") {
    auto ast = parse_query("SELECT * FROM w WHERE {{LLMMap('Is this a team event?','w::event')}} = TRUE");
    CHECK(infer_output_hint(ast, only_call(ast)).kind == HintKind::Boolean);
  }
  SECTION("literal on the left") {
    auto ast = parse_query("SELECT * FROM w WHERE FALSE = {{LLMMap('q','w::event')}}");
    CHECK(infer_output_hint(ast, only_call(ast)).kind == HintKind::Boolean);
  }
  SECTION("numeric literal") {
    auto ast = parse_query("SELECT * FROM w WHERE {{LLMMap('How old?','w::name')}} > 30");
    OutputHint h = infer_output_hint(ast, only_call(ast));
    CHECK(h.kind == HintKind::ExampleLiteral);
    CHECK(h.example == "30");
  }
  SECTION("IN list") {
    auto ast = parse_query("SELECT * FROM w WHERE {{LLMMap('q','w::name')}} IN ('a', 'b')");
    OutputHint h = infer_output_hint(ast, only_call(ast));
    CHECK(h.kind == HintKind::ExampleLiteral);
    CHECK(h.example == "a");
  }
  SECTION("IS NULL gives nothing") {
    auto ast = parse_query("SELECT * FROM w WHERE {{LLMMap('q','w::name')}} IS NULL");
    CHECK(infer_output_hint(ast, only_call(ast)).kind == HintKind::None);
  }
  SECTION("bare select item") {
    auto ast = parse_query("SELECT {{LLMMap('q','w::city')}} FROM w");
    const auto& call = only_call(ast);
    CHECK(call.context == SyntacticContext::SelectItem);
    CHECK(infer_output_hint(ast, call).kind == HintKind::None);
  }
  SECTION("arithmetic operand") {
    auto ast = parse_query("SELECT * FROM w WHERE {{LLMMap('q','w::n')}} + 1 = 3");
    CHECK(infer_output_hint(ast, only_call(ast)).kind == HintKind::Numeric);
  }
}

TEST_CASE("literal hints only come from comparisons") {
  auto corpus = hql::testing::read_corpus(hql::testing::data_path("corpus/grammar.sql"));
  std::size_t literal_hints = 0;
  for (const auto& entry : corpus) {
    auto ast = parse_query(entry.query);
    for (const auto& call : ast.ingredients()) {
      OutputHint h = infer_output_hint(ast, call);
      if (h.kind != HintKind::ExampleLiteral) continue;
      ++literal_hints;
      INFO(entry.name);
      REQUIRE(h.source_node != kNoNode);
      CHECK(ast.node(h.source_node).kind == NodeKind::Literal);
      NodeId op = effective_parent(ast, h.source_node);
      if (ast.node(op).kind == NodeKind::InList) op = effective_parent(ast, op);
      const Node& n = ast.node(op);
      bool comparison = n.kind == NodeKind::In || (n.kind == NodeKind::Binary && is_comparison_operator(n.text));
      CHECK(comparison);
      CHECK(ast.is_within(call.node, op));
    }
  }
  CHECK(literal_hints > 0);
}

TEST_CASE("render_native needs every ingredient covered") {
  auto ast = parse_query("SELECT * FROM w WHERE {{LLMMap('q','w::event')}} = TRUE");
  try {
    render_native(ast, {});
    FAIL("expected MissingSubstitution");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingSubstitution);
  }
  std::string sql = render_native(ast, {{only_call(ast).node, "'1'"}});
  CHECK(sql == "SELECT * FROM w WHERE '1' = TRUE");
  CHECK(sql.find("{{") == std::string::npos);
}

TEST_CASE("substituted map column gives the hand-written result") {
  Database db = Database::open_memory();
  db.exec("CREATE TABLE w (event TEXT);"
          "INSERT INTO w VALUES ('team event'), ('4x100 medley relay'), ('100m freestyle');"
          "CREATE TEMP TABLE m (value TEXT, result);"
          "INSERT INTO m VALUES ('team event', TRUE), ('4x100 medley relay', TRUE), ('100m freestyle', FALSE)");
  auto ast = parse_query("SELECT event FROM w WHERE {{LLMMap('Is this a team event?','w::event')}} = TRUE ORDER BY event");
  std::string sql = render_native(ast, {{only_call(ast).node, "(SELECT result FROM m WHERE m.value = w.event)"}});
  Table manual = db.query("SELECT event FROM w JOIN m ON m.value = w.event WHERE m.result = TRUE ORDER BY event");
  CHECK(db.query(sql) == manual);
  CHECK(manual.row_count() == 2);
}

TEST_CASE("names and strings") {
  SECTION("ingredient names ignore case") {
    auto ast = parse_query("SELECT * FROM w WHERE {{llmmap('q','w::a')}} = 1");
    CHECK(only_call(ast).kind == IngredientKind::Map);
    CHECK(only_call(ast).name == "llmmap");
  }
  SECTION("doubled quotes inside a question") {
    auto ast = parse_query("SELECT {{LLMQA('Who''s there?')}}");
    CHECK(only_call(ast).question == "Who's there?");
  }
  SECTION("QA options") {
    auto ast = parse_query("SELECT {{LLMQA('q', (SELECT 1), options='w::year')}}");
    const auto& call = only_call(ast);
    REQUIRE(call.options);
    CHECK(call.options->str() == "w::year");
  }
}

TEST_CASE("syntax errors carry a span") {
  const char* bad[] = {
      "SELECT * FROM w WHERE {{LLMMap('q','w::a') = 1",
      "SELECT {{Unknown('q')}}",
      "SELECT * FROM",
      "SELECT {{LLMMap(\"q\", 'w::a')}} FROM w",
  };
  for (const char* q : bad) {
    INFO(q);
    try {
      parse_query(q);
      FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
      CHECK(e.span().end <= std::string_view(q).size());
    }
  }
}

TEST_CASE("registered custom names parse") {
  IngredientRegistry reg;
  reg.register_custom("VQA", CustomClass::Aggregate,
                      AggregateHandler([](const std::string&, const Table&, const std::vector<std::string>&,
                                          Blender&) { return Value{std::string("cat")}; }));
  auto ast = parse_query("SELECT {{VQA('What is in the picture?', (SELECT image FROM pics))}}", &reg);
  const auto& call = only_call(ast);
  CHECK(call.kind == IngredientKind::Custom);
  CHECK(call.custom_class == CustomClass::Aggregate);
  CHECK_THROWS_AS(parse_query("SELECT {{VQA('q')}}"), SyntaxError);
}

TEST_CASE("formatting keeps the query intact") {
  std::string q = "select  a ,b from   t where {{LLMMap('q','t::a')}}   = 'x'";
  auto ast = parse_query(q);
  std::string formatted = format_query(ast);
  auto again = parse_query(formatted);
  CHECK(again.ingredients().size() == 1);
  CHECK(squash_ws(render(again, {})) == squash_ws(formatted));
}
