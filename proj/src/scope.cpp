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

#include "scope.hpp"

#include <set>

#include "hql/lexer.hpp"
#include "hql/value.hpp"

namespace hql::detail {

namespace {

bool is_fts(const TableSchema* t) {
  return t && t->is_virtual && to_lower(t->create_sql).find("fts5") != std::string::npos;
}

// Common table expressions visible from `id`, outermost first.
std::vector<NodeId> visible_ctes(const QueryAst& ast, NodeId id) {
  std::vector<std::vector<NodeId>> levels;
  for (NodeId cur = ast.node(id).parent; cur != kNoNode; cur = ast.node(cur).parent) {
    const Node& n = ast.node(cur);
    if (n.kind != NodeKind::Statement || n.children.empty()) continue;
    const Node& first = ast.node(n.children.front());
    if (first.kind != NodeKind::WithClause) continue;
    std::vector<NodeId> level;
    bool recursive = first.has(node_flags::kRecursive);
    for (NodeId cte : first.children) {
      if (ast.is_within(id, cte)) {
        if (recursive) level.push_back(cte);
        break;
      }
      level.push_back(cte);
    }
    levels.push_back(std::move(level));
  }
  // levels[0] is innermost; inner names shadow outer ones.
  std::set<std::string> seen;
  std::set<NodeId> keep;
  for (const auto& level : levels) {
    for (NodeId cte : level) {
      if (seen.insert(to_lower(unquote(ast.node(cte).text))).second) keep.insert(cte);
    }
  }
  // Emit outer levels first so inner expressions can refer to them.
  std::vector<NodeId> out;
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    for (NodeId cte : *it) {
      if (keep.count(cte)) out.push_back(cte);
    }
  }
  return out;
}

bool recursive_with_visible(const QueryAst& ast, NodeId id) {
  for (NodeId cur = ast.node(id).parent; cur != kNoNode; cur = ast.node(cur).parent) {
    const Node& n = ast.node(cur);
    if (n.kind != NodeKind::Statement || n.children.empty()) continue;
    const Node& first = ast.node(n.children.front());
    if (first.kind == NodeKind::WithClause && first.has(node_flags::kRecursive)) return true;
  }
  return false;
}

std::string alias_of(const QueryAst& ast, const Node& n) {
  for (NodeId c : n.children) {
    if (ast.node(c).kind == NodeKind::Alias) return ast.node(c).text;
  }
  return {};
}

void collect_items(const QueryAst& ast, NodeId owner, const DatabaseSchema& schema,
                   const std::set<std::string>& ctes, SelectScope& scope) {
  for (NodeId id : ast.node(owner).children) {
    const Node& n = ast.node(id);
    switch (n.kind) {
      case NodeKind::JoinGroup:
        collect_items(ast, id, schema, ctes, scope);
        break;
      case NodeKind::JoinOp:
        if (n.text.find("LEFT") != std::string::npos || n.text.find("RIGHT") != std::string::npos ||
            n.text.find("FULL") != std::string::npos) {
          scope.outer_join = true;
        }
        break;
      case NodeKind::TableRef:
      case NodeKind::DerivedTable:
      case NodeKind::TableFunction:
      case NodeKind::Ingredient: {
        FromItem item;
        item.node = id;
        item.kind = n.kind;
        item.alias_sql = alias_of(ast, n);
        if (n.kind == NodeKind::TableRef || n.kind == NodeKind::TableFunction) {
          item.table = unquote(n.text);
          item.table_sql = n.aux.empty() ? n.text : n.aux + "." + n.text;
        }
        item.cte = n.kind == NodeKind::TableRef && n.aux.empty() && ctes.count(to_lower(item.table));
        if (n.kind == NodeKind::TableRef && !item.cte) {
          item.schema = schema.find(item.table);
          item.fts = is_fts(item.schema);
        }
        item.qualifier = item.alias_sql.empty() ? item.table : unquote(item.alias_sql);
        item.qualifier_sql = item.alias_sql.empty() ? n.text : item.alias_sql;
        scope.items.push_back(std::move(item));
        break;
      }
      default:
        break;
    }
  }
}

void flatten_and(const QueryAst& ast, NodeId id, std::vector<NodeId>& out) {
  const Node& n = ast.node(id);
  if (n.kind == NodeKind::Paren) {
    flatten_and(ast, n.children.front(), out);
  } else if (n.kind == NodeKind::Binary && n.text == "AND") {
    flatten_and(ast, n.children[0], out);
    flatten_and(ast, n.children[1], out);
  } else {
    out.push_back(id);
  }
}

template <class Fn>
void walk(const QueryAst& ast, NodeId id, Fn&& fn) {
  fn(id);
  for (NodeId c : ast.node(id).children) walk(ast, c, fn);
}

}  // namespace

bool FromItem::has_column(std::string_view column) const {
  if (!schema) return false;
  if (schema->has_column(column)) return true;
  if (iequals(column, "rowid") || iequals(column, "oid") || iequals(column, "_rowid_")) return true;
  return fts && (iequals(column, table) || iequals(column, "rank"));
}

NodeId enclosing_select(const QueryAst& ast, NodeId id) {
  for (NodeId cur = ast.node(id).parent; cur != kNoNode; cur = ast.node(cur).parent) {
    if (ast.node(cur).kind == NodeKind::Select) return cur;
  }
  return kNoNode;
}

SelectScope analyze_select(const QueryAst& ast, NodeId select, const DatabaseSchema& schema) {
  SelectScope scope;
  scope.select = select;
  std::set<std::string> ctes;
  for (NodeId cte : visible_ctes(ast, select)) ctes.insert(to_lower(unquote(ast.node(cte).text)));
  for (NodeId c : ast.node(select).children) {
    const Node& n = ast.node(c);
    if (n.kind == NodeKind::FromClause) collect_items(ast, c, schema, ctes, scope);
    if (n.kind == NodeKind::WhereClause) flatten_and(ast, n.children.front(), scope.conjuncts);
  }
  return scope;
}

std::optional<std::size_t> find_item(const SelectScope& scope, std::string_view table) {
  std::vector<std::size_t> by_alias;
  std::vector<std::size_t> by_table;
  for (std::size_t i = 0; i < scope.items.size(); ++i) {
    const FromItem& it = scope.items[i];
    if (it.kind == NodeKind::Ingredient) continue;
    if (!it.alias_sql.empty() && iequals(it.qualifier, table)) by_alias.push_back(i);
    if (!it.table.empty() && iequals(it.table, table)) by_table.push_back(i);
  }
  const auto& hits = by_alias.empty() ? by_table : by_alias;
  if (hits.empty()) return std::nullopt;
  if (hits.size() > 1) {
    throw Error(ErrorCode::Plan, "table '" + std::string(table) +
                                     "' appears more than once in FROM; use an alias in the ingredient");
  }
  return hits.front();
}

bool contains_kind(const QueryAst& ast, NodeId id, NodeKind kind) {
  bool found = false;
  walk(ast, id, [&](NodeId n) { found = found || ast.node(n).kind == kind; });
  return found;
}

bool pushable(const QueryAst& ast, NodeId conjunct, const FromItem& target,
              const std::vector<const FromItem*>& others, const DatabaseSchema& schema) {
  bool ok = true;
  walk(ast, conjunct, [&](NodeId id) {
    if (!ok) return;
    const Node& n = ast.node(id);
    if (n.kind == NodeKind::Ingredient || n.kind == NodeKind::Parameter) {
      ok = false;
      return;
    }
    if (n.kind == NodeKind::Function &&
        (iequals(n.text, "random") || iequals(n.text, "randomblob") || iequals(n.text, "changes") ||
         iequals(n.text, "last_insert_rowid") || iequals(n.text, "total_changes"))) {
      ok = false;
      return;
    }
    if (n.kind != NodeKind::ColumnRef) return;

    // Items of subqueries nested inside the conjunct that enclose this ref.
    std::vector<FromItem> inner;
    for (NodeId cur = n.parent; cur != kNoNode && cur != conjunct; cur = ast.node(cur).parent) {
      if (ast.node(cur).kind == NodeKind::Select) {
        SelectScope s = analyze_select(ast, cur, schema);
        for (auto& it : s.items) inner.push_back(std::move(it));
      }
    }
    std::string column = unquote(n.text);
    if (!n.aux.empty()) {
      std::string q = n.aux;
      if (auto dot = q.rfind('.'); dot != std::string::npos) q = q.substr(dot + 1);
      q = unquote(q);
      for (const auto& it : inner) {
        if (iequals(it.qualifier, q)) return;
      }
      if (iequals(target.qualifier, q)) return;
      ok = false;
      return;
    }
    if (!inner.empty()) {
      for (const auto& it : inner) {
        if (it.has_column(column)) return;
      }
      for (const auto& it : inner) {
        if (!it.schema) {
          ok = false;
          return;
        }
      }
    }
    if (!target.has_column(column)) {
      ok = false;
      return;
    }
    for (const FromItem* o : others) {
      if (!o->schema || o->has_column(column)) {
        ok = false;
        return;
      }
    }
  });
  return ok;
}

std::vector<std::string> visible_cte_names(const QueryAst& ast, NodeId id) {
  std::vector<std::string> out;
  for (NodeId cte : visible_ctes(ast, id)) out.push_back(to_lower(unquote(ast.node(cte).text)));
  return out;
}

std::string with_prefix(const QueryAst& ast, NodeId id, const Substitutions& subs) {
  auto ctes = visible_ctes(ast, id);
  if (ctes.empty()) return {};
  std::string out = recursive_with_visible(ast, id) ? "WITH RECURSIVE " : "WITH ";
  for (std::size_t i = 0; i < ctes.size(); ++i) {
    if (i) out += ", ";
    out += render(ast, subs, ctes[i]);
  }
  return out + " ";
}

FromItem introduced_item(const DatabaseSchema& schema, const std::string& table) {
  FromItem item;
  item.kind = NodeKind::TableRef;
  item.schema = schema.find(table);
  item.table = item.schema ? item.schema->name : table;
  item.qualifier = item.table;
  item.qualifier_sql = quote_ident(item.table);
  item.table_sql = item.qualifier_sql;
  item.fts = is_fts(item.schema);
  return item;
}

std::optional<TableColumn> single_column_source(const QueryAst& ast, NodeId subquery) {
  const Node& sub = ast.node(subquery);
  if (sub.kind != NodeKind::Subquery) return std::nullopt;
  const Node& stmt = ast.node(sub.children.front());
  if (stmt.children.empty()) return std::nullopt;
  const Node& core = ast.node(stmt.children.front());
  if (core.kind != NodeKind::Select) return std::nullopt;
  const Node* list = nullptr;
  const Node* from = nullptr;
  for (NodeId c : core.children) {
    const Node& n = ast.node(c);
    if (n.kind == NodeKind::ResultList) list = &n;
    if (n.kind == NodeKind::FromClause) from = &n;
  }
  if (!list || !from || list->children.size() != 1 || from->children.size() != 1) return std::nullopt;
  const Node& col = ast.node(list->children.front());
  const Node& table = ast.node(from->children.front());
  if (table.kind != NodeKind::TableRef) return std::nullopt;
  const Node& expr = ast.node(col.children.front());
  if (expr.kind != NodeKind::ColumnRef) return std::nullopt;
  return TableColumn{unquote(table.text), unquote(expr.text)};
}

}  // namespace hql::detail
