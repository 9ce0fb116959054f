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

#include <string>

#include "hql/ast.hpp"

namespace hql {

namespace {

namespace nf = node_flags;

class Printer {
 public:
  explicit Printer(const QueryAst& ast) : ast_(ast) {}

  std::string print(NodeId id) {
    const Node& n = ast_.node(id);
    const auto& kids = n.children;
    auto child = [&](std::size_t i) { return print(kids[i]); };
    auto list = [&](std::size_t from, std::size_t to, std::string_view sep) {
      std::string out;
      for (std::size_t i = from; i < to; ++i) {
        if (i > from) out += sep;
        out += child(i);
      }
      return out;
    };
    auto all = [&](std::string_view sep) { return list(0, kids.size(), sep); };

    switch (n.kind) {
      case NodeKind::Statement: {
        std::string out = all(" ");
        if (n.has(nf::kSemicolon)) out += ";";
        return out;
      }
      case NodeKind::WithClause:
        return std::string("WITH ") + (n.has(nf::kRecursive) ? "RECURSIVE " : "") + all(", ");
      case NodeKind::Cte: {
        std::string out = n.text;
        std::size_t i = 0;
        if (ast_.node(kids[0]).kind == NodeKind::NameList) out += child(i++);
        out += " AS ";
        if (n.has(nf::kNotMaterialized)) out += "NOT MATERIALIZED ";
        if (n.has(nf::kMaterialized)) out += "MATERIALIZED ";
        return out + "(" + child(i) + ")";
      }
      case NodeKind::Compound:
        return all(" ");
      case NodeKind::CompoundOp:
        return n.text;
      case NodeKind::Select: {
        std::string out = "SELECT ";
        if (n.has(nf::kDistinct)) out += "DISTINCT ";
        if (n.has(nf::kAll)) out += "ALL ";
        return out + all(" ");
      }
      case NodeKind::Values:
        return "VALUES " + all(", ");
      case NodeKind::ResultList:
        return all(", ");
      case NodeKind::ResultColumn:
      case NodeKind::DerivedTable:
      case NodeKind::TableRef:
        break;
      case NodeKind::Star:
        return n.aux.empty() ? "*" : n.aux + ".*";
      case NodeKind::Alias:
        return (n.has(nf::kHasAs) ? "AS " : "") + n.text;
      case NodeKind::FromClause:
        return "FROM " + join_chain(kids);
      case NodeKind::JoinGroup:
        return "(" + join_chain(kids) + ")";
      case NodeKind::JoinOp:
        return n.text;
      case NodeKind::OnClause:
        return "ON " + child(0);
      case NodeKind::UsingClause:
        return "USING " + child(0);
      case NodeKind::NameList:
        return "(" + all(", ") + ")";
      case NodeKind::Name:
        return n.text;
      case NodeKind::TableFunction: {
        std::string out = qualified(n.aux, n.text) + "(";
        std::size_t args = kids.size();
        if (args && ast_.node(kids.back()).kind == NodeKind::Alias) --args;
        out += list(0, args, ", ") + ")";
        if (args < kids.size()) out += " " + child(args);
        return out;
      }
      case NodeKind::WhereClause:
        return "WHERE " + child(0);
      case NodeKind::GroupByClause:
        return "GROUP BY " + all(", ");
      case NodeKind::HavingClause:
        return "HAVING " + child(0);
      case NodeKind::OrderByClause:
        return "ORDER BY " + all(", ");
      case NodeKind::OrderTerm: {
        std::string out = child(0);
        if (n.has(nf::kAsc)) out += " ASC";
        if (n.has(nf::kDesc)) out += " DESC";
        if (n.has(nf::kNullsFirst)) out += " NULLS FIRST";
        if (n.has(nf::kNullsLast)) out += " NULLS LAST";
        return out;
      }
      case NodeKind::LimitClause: {
        std::string out = "LIMIT " + child(0);
        if (kids.size() > 1) out += (n.has(nf::kOffsetComma) ? ", " : " OFFSET ") + child(1);
        return out;
      }
      case NodeKind::Binary: {
        std::string out = child(0) + " " + n.text + " " + child(1);
        if (kids.size() > 2) out += " ESCAPE " + child(2);
        return out;
      }
      case NodeKind::Unary:
        return n.text == "NOT" ? "NOT " + child(0) : n.text + child(0);
      case NodeKind::Postfix:
        return child(0) + " " + n.text;
      case NodeKind::Between:
        return child(0) + (n.has(nf::kNot) ? " NOT" : "") + " BETWEEN " + child(1) + " AND " +
               child(2);
      case NodeKind::In:
        return child(0) + (n.has(nf::kNot) ? " NOT" : "") + " IN " + child(1);
      case NodeKind::InList:
      case NodeKind::RowValue:
        return "(" + all(", ") + ")";
      case NodeKind::Collate:
        return child(0) + " COLLATE " + n.aux;
      case NodeKind::Cast:
        return "CAST(" + child(0) + " AS " + n.aux + ")";
      case NodeKind::Paren:
      case NodeKind::Subquery:
        return "(" + child(0) + ")";
      case NodeKind::Function: {
        std::string out = n.text + "(";
        std::size_t args = kids.size();
        bool filter = args && ast_.node(kids.back()).kind == NodeKind::FilterClause;
        if (filter) --args;
        if (n.has(nf::kStarArg)) out += "*";
        if (n.has(nf::kDistinct)) out += "DISTINCT ";
        out += list(0, args, ", ") + ")";
        if (filter) out += " " + child(args);
        return out;
      }
      case NodeKind::FilterClause:
        return "FILTER (WHERE " + child(0) + ")";
      case NodeKind::Exists:
        return "EXISTS (" + child(0) + ")";
      case NodeKind::Case:
        return "CASE " + all(" ") + " END";
      case NodeKind::When:
        return "WHEN " + child(0) + " THEN " + child(1);
      case NodeKind::Else:
        return "ELSE " + child(0);
      case NodeKind::Literal:
      case NodeKind::Parameter:
        return n.text;
      case NodeKind::ColumnRef:
        return qualified(n.aux, n.text);
      case NodeKind::Ingredient:
        return "{{" + n.text + "(" + all(", ") + ")}}";
      case NodeKind::IngredientArg:
        return (n.text.empty() ? "" : n.text + "=") + child(0);
    }

    // Kinds whose first child is the body and optional trailing Alias.
    std::string out;
    if (n.kind == NodeKind::TableRef) {
      out = qualified(n.aux, n.text);
      if (!kids.empty()) out += " " + child(0);
      return out;
    }
    if (n.kind == NodeKind::DerivedTable) {
      out = "(" + child(0) + ")";
    } else {
      out = child(0);
    }
    if (kids.size() > 1) out += " " + child(1);
    return out;
  }

 private:
  std::string join_chain(const std::vector<NodeId>& kids) {
    std::string out;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const Node& k = ast_.node(kids[i]);
      if (i > 0) out += k.kind == NodeKind::JoinOp && k.text == "," ? "" : " ";
      out += print(kids[i]);
    }
    return out;
  }

  static std::string qualified(const std::string& qualifier, const std::string& name) {
    return qualifier.empty() ? name : qualifier + "." + name;
  }

  const QueryAst& ast_;
};

}  // namespace

std::string format_query(const QueryAst& ast) {
  if (ast.root() == kNoNode) return "";
  return Printer(ast).print(ast.root());
}

}  // namespace hql
