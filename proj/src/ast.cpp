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

#include <stdexcept>

#include "hql/ast.hpp"
#include "hql/value.hpp"

namespace hql {

const std::string& QueryAst::text() const {
  static const std::string kEmpty;
  return data_ ? data_->text : kEmpty;
}

NodeId QueryAst::root() const { return data_ ? data_->root : kNoNode; }

const Node& QueryAst::node(NodeId id) const {
  if (!data_ || id < 0 || static_cast<std::size_t>(id) >= data_->nodes.size()) {
    throw std::out_of_range("node id " + std::to_string(id) + " out of range");
  }
  return data_->nodes[static_cast<std::size_t>(id)];
}

std::size_t QueryAst::size() const { return data_ ? data_->nodes.size() : 0; }

const std::vector<IngredientCall>& QueryAst::ingredients() const {
  static const std::vector<IngredientCall> kNone;
  return data_ ? data_->ingredients : kNone;
}

const IngredientCall* QueryAst::ingredient_at(NodeId id) const {
  for (const auto& call : ingredients()) {
    if (call.node == id) return &call;
  }
  return nullptr;
}

std::string_view QueryAst::source(NodeId id) const {
  const Node& n = node(id);
  return std::string_view(data_->text).substr(n.span.begin, n.span.size());
}

bool QueryAst::is_within(NodeId id, NodeId ancestor) const {
  for (NodeId cur = id; cur != kNoNode; cur = node(cur).parent) {
    if (cur == ancestor) return true;
  }
  return false;
}

std::optional<TableColumn> parse_table_column(std::string_view text) {
  auto sep = text.find("::");
  if (sep == std::string_view::npos) return std::nullopt;
  TableColumn tc{std::string(text.substr(0, sep)), std::string(text.substr(sep + 2))};
  if (tc.table.empty() || tc.column.empty()) return std::nullopt;
  if (tc.column.find("::") != std::string::npos) return std::nullopt;
  return tc;
}

std::vector<IngredientCall> extract_ingredients(const QueryAst& ast) {
  return ast.ingredients();
}

namespace {

void render_into(const QueryAst& ast, const Substitutions& subs, NodeId id, bool native,
                 std::string& out) {
  if (auto it = subs.find(id); it != subs.end()) {
    out += it->second;
    return;
  }
  const Node& n = ast.node(id);
  if (native && n.kind == NodeKind::Ingredient) {
    throw Error(ErrorCode::MissingSubstitution,
                "no substitution for ingredient " + n.text + " at bytes " +
                    std::to_string(n.span.begin) + ".." + std::to_string(n.span.end));
  }
  const std::string& text = ast.text();
  std::size_t pos = n.span.begin;
  for (NodeId child : n.children) {
    const Node& c = ast.node(child);
    out.append(text, pos, c.span.begin - pos);
    render_into(ast, subs, child, native, out);
    pos = c.span.end;
  }
  out.append(text, pos, n.span.end - pos);
}

}  // namespace

std::string render(const QueryAst& ast, const Substitutions& subs, NodeId id) {
  std::string out;
  render_into(ast, subs, id == kNoNode ? ast.root() : id, false, out);
  return out;
}

std::string render_native(const QueryAst& ast, const Substitutions& subs, NodeId id) {
  std::string out;
  render_into(ast, subs, id == kNoNode ? ast.root() : id, true, out);
  return out;
}

namespace {

nlohmann::json node_json(const QueryAst& ast, NodeId id) {
  const Node& n = ast.node(id);
  nlohmann::json j;
  j["id"] = id;
  j["kind"] = std::string(to_string(n.kind));
  j["span"] = {n.span.begin, n.span.end};
  if (!n.text.empty()) j["text"] = n.text;
  if (!n.aux.empty()) j["aux"] = n.aux;
  if (n.kind == NodeKind::Ingredient) {
    if (const IngredientCall* call = ast.ingredient_at(id)) {
      j["ingredient"] = std::string(to_string(call->kind));
      j["context"] = std::string(to_string(call->context));
      j["question"] = call->question;
      if (call->target_column) j["target_column"] = call->target_column->str();
      if (call->options) j["options"] = call->options->str();
    }
  }
  nlohmann::json kids = nlohmann::json::array();
  for (NodeId c : n.children) kids.push_back(node_json(ast, c));
  if (!kids.empty()) j["children"] = std::move(kids);
  return j;
}

}  // namespace

nlohmann::json ast_to_json(const QueryAst& ast) {
  if (ast.root() == kNoNode) return nullptr;
  return node_json(ast, ast.root());
}

bool is_comparison_operator(std::string_view op) {
  return op == "=" || op == "==" || op == "!=" || op == "<>" || op == "<" || op == ">" ||
         op == "<=" || op == ">=" || op == "IS" || op == "IS NOT";
}

NodeId effective_parent(const QueryAst& ast, NodeId id) {
  NodeId p = ast.node(id).parent;
  while (p != kNoNode && ast.node(p).kind == NodeKind::Paren) p = ast.node(p).parent;
  return p;
}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Statement: return "Statement";
    case NodeKind::WithClause: return "WithClause";
    case NodeKind::Cte: return "Cte";
    case NodeKind::Compound: return "Compound";
    case NodeKind::CompoundOp: return "CompoundOp";
    case NodeKind::Select: return "Select";
    case NodeKind::Values: return "Values";
    case NodeKind::ResultList: return "ResultList";
    case NodeKind::ResultColumn: return "ResultColumn";
    case NodeKind::Star: return "Star";
    case NodeKind::Alias: return "Alias";
    case NodeKind::FromClause: return "FromClause";
    case NodeKind::JoinGroup: return "JoinGroup";
    case NodeKind::JoinOp: return "JoinOp";
    case NodeKind::OnClause: return "OnClause";
    case NodeKind::UsingClause: return "UsingClause";
    case NodeKind::NameList: return "NameList";
    case NodeKind::Name: return "Name";
    case NodeKind::TableRef: return "TableRef";
    case NodeKind::TableFunction: return "TableFunction";
    case NodeKind::DerivedTable: return "DerivedTable";
    case NodeKind::WhereClause: return "WhereClause";
    case NodeKind::GroupByClause: return "GroupByClause";
    case NodeKind::HavingClause: return "HavingClause";
    case NodeKind::OrderByClause: return "OrderByClause";
    case NodeKind::OrderTerm: return "OrderTerm";
    case NodeKind::LimitClause: return "LimitClause";
    case NodeKind::Binary: return "Binary";
    case NodeKind::Unary: return "Unary";
    case NodeKind::Postfix: return "Postfix";
    case NodeKind::Between: return "Between";
    case NodeKind::In: return "In";
    case NodeKind::InList: return "InList";
    case NodeKind::Collate: return "Collate";
    case NodeKind::Cast: return "Cast";
    case NodeKind::Paren: return "Paren";
    case NodeKind::RowValue: return "RowValue";
    case NodeKind::Function: return "Function";
    case NodeKind::FilterClause: return "FilterClause";
    case NodeKind::Subquery: return "Subquery";
    case NodeKind::Exists: return "Exists";
    case NodeKind::Case: return "Case";
    case NodeKind::When: return "When";
    case NodeKind::Else: return "Else";
    case NodeKind::Literal: return "Literal";
    case NodeKind::ColumnRef: return "ColumnRef";
    case NodeKind::Parameter: return "Parameter";
    case NodeKind::Ingredient: return "Ingredient";
    case NodeKind::IngredientArg: return "IngredientArg";
  }
  return "Unknown";
}

std::string_view to_string(IngredientKind kind) {
  switch (kind) {
    case IngredientKind::Map: return "Map";
    case IngredientKind::QA: return "QA";
    case IngredientKind::Join: return "Join";
    case IngredientKind::Validate: return "Validate";
    case IngredientKind::Custom: return "Custom";
  }
  return "Unknown";
}

std::string_view to_string(SyntacticContext ctx) {
  switch (ctx) {
    case SyntacticContext::ComparisonOperand: return "comparison_operand";
    case SyntacticContext::SelectItem: return "select_item";
    case SyntacticContext::TableExpression: return "table_expression";
    case SyntacticContext::JoinCondition: return "join_condition";
    case SyntacticContext::Predicate: return "predicate";
    case SyntacticContext::GroupBy: return "group_by";
    case SyntacticContext::OrderBy: return "order_by";
    case SyntacticContext::Argument: return "argument";
    case SyntacticContext::Other: return "other";
  }
  return "other";
}

std::string_view to_string(HintKind kind) {
  switch (kind) {
    case HintKind::None: return "None";
    case HintKind::Boolean: return "Boolean";
    case HintKind::ExampleLiteral: return "ExampleLiteral";
    case HintKind::Numeric: return "Numeric";
  }
  return "None";
}

}  // namespace hql
