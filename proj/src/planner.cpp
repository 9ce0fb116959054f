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

#include "hql/planner.hpp"

#include <algorithm>

#include "hql/lexer.hpp"
#include "plan_internal.hpp"

namespace hql {

namespace detail {

namespace {

Error plan_error(const std::string& msg) { return Error(ErrorCode::Plan, msg); }

std::string resolve_column(const FromItem& item, const TableColumn& tc) {
  if (!item.schema) return tc.column;
  std::string c = item.schema->find_column(tc.column);
  if (!c.empty()) return c;
  if (item.has_column(tc.column)) return tc.column;
  throw plan_error("no such column: " + tc.str());
}

void check_item(const FromItem& item, const TableColumn& tc) {
  if (item.kind != NodeKind::TableRef) {
    throw plan_error("ingredient input '" + tc.str() + "' must name a table, not a derived table");
  }
  if (!item.schema && !item.cte) throw plan_error("no such table: " + tc.table);
}

// Searches the FROM clauses enclosing `at`, nearest first.
std::optional<ColumnSource> find_in_scopes(const QueryAst& ast, NodeId at, const TableColumn& tc,
                                           const DatabaseSchema& schema) {
  NodeId sel = enclosing_select(ast, at);
  for (NodeId s = sel; s != kNoNode; s = enclosing_select(ast, s)) {
    SelectScope scope = analyze_select(ast, s, schema);
    auto idx = find_item(scope, tc.table);
    if (!idx) continue;
    ColumnSource src;
    src.item = scope.items[*idx];
    check_item(src.item, tc);
    src.column = resolve_column(src.item, tc);
    src.same_scope = s == sel;
    for (std::size_t i = 0; i < scope.items.size(); ++i) {
      if (i != *idx) src.others.push_back(scope.items[i]);
    }
    src.scope = std::move(scope);
    return src;
  }
  return std::nullopt;
}

[[noreturn]] void not_in_from(const IngredientCall& call, const TableColumn& tc,
                              const DatabaseSchema& schema) {
  if (!schema.find(tc.table)) throw plan_error("no such table: " + tc.table);
  throw plan_error("table '" + tc.table + "' used by " + call.name +
                   " is not in the FROM clause of an enclosing SELECT");
}

std::string join_strings(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

bool is_scalar_call(const IngredientCall& call) {
  return call.kind == IngredientKind::Map ||
         (call.kind == IngredientKind::Custom && call.custom_class == CustomClass::Scalar);
}

bool is_aggregate_call(const IngredientCall& call) {
  return call.kind == IngredientKind::QA ||
         (call.kind == IngredientKind::Custom && call.custom_class == CustomClass::Aggregate);
}

void check_table_column(const QueryAst& ast, NodeId at, const TableColumn& tc,
                        const DatabaseSchema& schema) {
  auto ctes = visible_cte_names(ast, at);
  if (std::find(ctes.begin(), ctes.end(), to_lower(tc.table)) != ctes.end()) return;
  const TableSchema* t = schema.find(tc.table);
  if (!t) throw plan_error("no such table: " + tc.table);
  FromItem probe = introduced_item(schema, tc.table);
  if (!probe.has_column(tc.column)) throw plan_error("no such column: " + tc.str());
}

ColumnSource resolve_map_target(const QueryAst& ast, const IngredientCall& call,
                                const DatabaseSchema& schema) {
  if (!call.target_column) throw plan_error(call.name + " needs a 'table::column' argument");
  if (auto src = find_in_scopes(ast, call.node, *call.target_column, schema)) return *src;
  not_in_from(call, *call.target_column, schema);
}

JoinSides resolve_join(const QueryAst& ast, const IngredientCall& call,
                       const DatabaseSchema& schema) {
  if (!call.options) throw plan_error(call.name + " needs options='table::column'");
  JoinSides js;
  TableColumn left_tc;
  if (call.target_column) {
    left_tc = *call.target_column;
  } else if (call.context_subquery != kNoNode) {
    auto tc = single_column_source(ast, call.context_subquery);
    if (!tc) {
      throw plan_error(call.name + " left subquery must select one column from one table");
    }
    left_tc = *tc;
    js.left_subquery = call.context_subquery;
  } else {
    throw plan_error(call.name + " needs a left 'table::column' argument");
  }
  const TableColumn& right_tc = *call.options;

  NodeId sel = enclosing_select(ast, call.node);
  if (sel == kNoNode) throw plan_error(call.name + " must appear inside a SELECT");
  js.from_item = call.context == SyntacticContext::TableExpression;

  if (!js.from_item) {
    auto left = find_in_scopes(ast, call.node, left_tc, schema);
    if (!left) not_in_from(call, left_tc, schema);
    auto right = find_in_scopes(ast, call.node, right_tc, schema);
    if (!right) not_in_from(call, right_tc, schema);
    js.left = std::move(*left);
    js.right = std::move(*right);
    return js;
  }

  SelectScope scope = analyze_select(ast, sel, schema);
  SelectScope before;
  for (const FromItem& it : scope.items) {
    if (it.node != call.node && ast.node(it.node).span.begin < call.span.begin) {
      before.items.push_back(it);
    }
  }
  auto side = [&](const TableColumn& tc) {
    ColumnSource src;
    src.same_scope = true;
    if (auto idx = find_item(before, tc.table)) {
      src.item = before.items[*idx];
    } else {
      check_table_column(ast, call.node, tc, schema);
      src.item = introduced_item(schema, tc.table);
      src.item.cte = src.item.schema == nullptr;
      src.introduced = true;
    }
    check_item(src.item, tc);
    src.column = resolve_column(src.item, tc);
    return src;
  };
  js.left = side(left_tc);
  js.right = side(right_tc);
  if (js.left.introduced && js.right.introduced && iequals(js.left.item.table, js.right.item.table)) {
    throw plan_error(call.name + " joins '" + js.left.item.table +
                     "' with itself; put one side in FROM with an alias");
  }
  auto fill_others = [&](ColumnSource& s, const ColumnSource& other) {
    for (const FromItem& it : scope.items) {
      if (it.node == call.node) continue;
      if (!s.introduced && it.node == s.item.node) continue;
      s.others.push_back(it);
    }
    if (other.introduced) s.others.push_back(other.item);
    s.scope = scope;
  };
  fill_others(js.left, js.right);
  fill_others(js.right, js.left);
  return js;
}

PushdownQuery build_pushdown(const QueryAst& ast, NodeId at, const ColumnSource& src,
                             bool pushdown, const DatabaseSchema& schema,
                             const Substitutions& subs) {
  PushdownQuery q;
  q.qualifier_sql = src.item.qualifier_sql;
  q.column = src.column;
  if (pushdown && src.same_scope && !src.scope.outer_join) {
    std::vector<const FromItem*> others;
    for (const FromItem& o : src.others) others.push_back(&o);
    for (NodeId c : src.scope.conjuncts) {
      if (pushable(ast, c, src.item, others, schema)) q.pushed.push_back(render(ast, subs, c));
    }
  }
  q.sql = with_prefix(ast, at, subs) + "SELECT " + q.qualifier_sql + "." + quote_ident(q.column) +
          " AS \"value\" FROM " + src.item.table_sql;
  if (!src.item.alias_sql.empty()) q.sql += " AS " + src.item.alias_sql;
  if (!q.pushed.empty()) q.sql += " WHERE (" + join_strings(q.pushed, ") AND (") + ")";
  return q;
}

std::string column_sql(const QueryAst& ast, NodeId at, const TableColumn& tc,
                       const DatabaseSchema& schema, const Substitutions& subs) {
  check_table_column(ast, at, tc, schema);
  std::string column = tc.column;
  std::string table = tc.table;
  if (const TableSchema* t = schema.find(tc.table)) {
    table = t->name;
    std::string c = t->find_column(tc.column);
    if (!c.empty()) column = c;
  }
  return with_prefix(ast, at, subs) + "SELECT " + quote_ident(column) + " FROM " + quote_ident(table);
}

}  // namespace detail

using namespace detail;

std::string_view to_string(StepKind kind) {
  switch (kind) {
    case StepKind::NativeSubquery: return "native_subquery";
    case StepKind::Ingredient: return "ingredient";
    case StepKind::Substitute: return "substitute";
    case StepKind::FinalQuery: return "final_query";
  }
  return "unknown";
}

nlohmann::json ExecutionPlan::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const PlanStep& s : steps) {
    nlohmann::json j{{"kind", std::string(to_string(s.kind))}, {"sql", s.sql}};
    if (s.kind != StepKind::FinalQuery) j["ingredient"] = s.ingredient;
    if (!s.note.empty()) j["note"] = s.note;
    out.push_back(std::move(j));
  }
  return nlohmann::json{{"steps", out}};
}

PushdownQuery pushdown_predicates(const QueryAst& ast, const IngredientCall& call,
                                  const DatabaseSchema& schema, const PlanOptions& options) {
  if (is_scalar_call(call)) {
    return build_pushdown(ast, call.node, resolve_map_target(ast, call, schema), options.pushdown,
                          schema, {});
  }
  if (call.kind == IngredientKind::Join) {
    JoinSides js = resolve_join(ast, call, schema);
    if (js.left_subquery == kNoNode) {
      return build_pushdown(ast, call.node, js.left, options.pushdown, schema, {});
    }
    PushdownQuery q;
    q.sql = render(ast, {}, ast.node(js.left_subquery).children.front());
    q.qualifier_sql = js.left.item.qualifier_sql;
    q.column = js.left.column;
    return q;
  }
  PushdownQuery q;
  if (call.context_subquery != kNoNode) {
    q.sql = render(ast, {}, ast.node(call.context_subquery).children.front());
  } else if (call.target_column) {
    q.sql = column_sql(ast, call.node, *call.target_column, schema, {});
    q.column = call.target_column->column;
  } else {
    throw Error(ErrorCode::Plan, call.name + " has no table input");
  }
  return q;
}

std::string substitution_text(const IngredientArtifact& artifact) {
  struct Visitor {
    std::string operator()(const MapArtifact& a) const {
      std::string t = quote_ident(a.table);
      return "(SELECT \"result\" FROM " + t + " WHERE " + t + ".\"value\" = " + a.qualifier_sql + "." +
             quote_ident(a.column) + ")";
    }
    std::string operator()(const ScalarArtifact& a) const { return sql_literal(a.value); }
    std::string operator()(const VerdictArtifact& a) const { return a.value ? "TRUE" : "FALSE"; }
    std::string operator()(const JoinArtifact& a) const {
      std::string aux = quote_ident(a.table);
      auto cond = [&](const JoinLink& l, const char* side) {
        return l.qualifier_sql + "." + quote_ident(l.column) + " = " + aux + "." + side;
      };
      if (!a.from_item) {
        return "EXISTS (SELECT 1 FROM " + aux + " WHERE " + cond(a.left, "\"left\"") + " AND " +
               cond(a.right, "\"right\"") + ")";
      }
      std::vector<std::string> present;
      if (a.left.table_sql.empty()) present.push_back(cond(a.left, "\"left\""));
      if (a.right.table_sql.empty()) present.push_back(cond(a.right, "\"right\""));
      std::string out = aux;
      if (!present.empty()) out += " ON " + join_strings(present, " AND ");
      if (!a.left.table_sql.empty()) {
        out += " JOIN " + a.left.table_sql + " ON " + cond(a.left, "\"left\"");
      }
      if (!a.right.table_sql.empty()) {
        out += " JOIN " + a.right.table_sql + " ON " + cond(a.right, "\"right\"");
      }
      return out;
    }
  };
  return std::visit(Visitor{}, artifact);
}

QueryAst substitute(const QueryAst& ast, const IngredientCall& call,
                    const IngredientArtifact& artifact, const CustomNameLookup* custom) {
  bool fits = false;
  if (std::holds_alternative<MapArtifact>(artifact)) fits = is_scalar_call(call);
  if (std::holds_alternative<ScalarArtifact>(artifact)) fits = is_aggregate_call(call);
  if (std::holds_alternative<VerdictArtifact>(artifact)) fits = call.kind == IngredientKind::Validate;
  if (std::holds_alternative<JoinArtifact>(artifact)) fits = call.kind == IngredientKind::Join;
  if (!fits) {
    throw Error(ErrorCode::TypeMismatch,
                "artifact does not match " + std::string(to_string(call.kind)) + " call " + call.name);
  }
  if (!ast.ingredient_at(call.node)) {
    throw Error(ErrorCode::TypeMismatch, "call " + call.name + " does not belong to this query");
  }
  return parse_query(render(ast, {{call.node, substitution_text(artifact)}}), custom);
}

ExecutionPlan plan(const QueryAst& ast, const DatabaseSchema& schema, const PlanOptions& options) {
  ExecutionPlan out;
  Substitutions subs;
  const auto& calls = ast.ingredients();
  auto statement_of = [&](NodeId subquery) { return ast.node(subquery).children.front(); };
  for (std::size_t i = 0; i < calls.size(); ++i) {
    const IngredientCall& call = calls[i];
    const std::string n = std::to_string(i + 1);
    std::string text;
    if (is_scalar_call(call)) {
      ColumnSource src = resolve_map_target(ast, call, schema);
      PushdownQuery q = build_pushdown(ast, call.node, src, options.pushdown, schema, subs);
      out.steps.push_back({StepKind::NativeSubquery, i, q.sql,
                           std::to_string(q.pushed.size()) + " predicate(s) pushed"});
      text = substitution_text(MapArtifact{"__hql_map_" + n, q.qualifier_sql, q.column});
    } else if (call.kind == IngredientKind::Join) {
      JoinSides js = resolve_join(ast, call, schema);
      std::string left_sql =
          js.left_subquery != kNoNode
              ? render(ast, subs, statement_of(js.left_subquery))
              : build_pushdown(ast, call.node, js.left, options.pushdown, schema, subs).sql;
      out.steps.push_back({StepKind::NativeSubquery, i, left_sql, "left values"});
      PushdownQuery rq = build_pushdown(ast, call.node, js.right, options.pushdown, schema, subs);
      out.steps.push_back({StepKind::NativeSubquery, i, rq.sql, "right values"});
      JoinArtifact a;
      a.table = "__hql_join_" + n;
      a.from_item = js.from_item;
      a.left = {js.left.item.qualifier_sql, js.left.column,
                js.left.introduced ? js.left.item.table_sql : ""};
      a.right = {js.right.item.qualifier_sql, js.right.column,
                 js.right.introduced ? js.right.item.table_sql : ""};
      text = substitution_text(a);
    } else {
      if (call.context_subquery != kNoNode) {
        out.steps.push_back(
            {StepKind::NativeSubquery, i, render(ast, subs, statement_of(call.context_subquery)), "context"});
      } else if (call.target_column) {
        out.steps.push_back(
            {StepKind::NativeSubquery, i, column_sql(ast, call.node, *call.target_column, schema, subs),
             "context"});
      }
      if (call.options) {
        out.steps.push_back(
            {StepKind::NativeSubquery, i, column_sql(ast, call.node, *call.options, schema, subs), "options"});
      }
      text = call.kind == IngredientKind::Validate ? ":validate_" + n : ":answer_" + n;
    }
    out.steps.push_back({StepKind::Ingredient, i, "", call.name + ": " + call.question});
    out.steps.push_back({StepKind::Substitute, i, text, ""});
    subs[call.node] = text;
  }
  out.steps.push_back({StepKind::FinalQuery, 0, render(ast, subs), ""});
  return out;
}

}  // namespace hql
