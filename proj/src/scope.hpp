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

// Name resolution helpers shared by the planner and executor.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hql/ast.hpp"
#include "hql/storage.hpp"

namespace hql::detail {

struct FromItem {
  NodeId node = kNoNode;
  NodeKind kind = NodeKind::TableRef;
  std::string table;          // unquoted table name; empty for derived tables
  std::string qualifier;      // unquoted alias, else table name
  std::string qualifier_sql;  // text that references the item in SQL
  std::string table_sql;      // raw table text, with schema prefix
  std::string alias_sql;      // raw alias text or empty
  const TableSchema* schema = nullptr;  // null when columns are unknown
  bool fts = false;
  bool cte = false;  // names a common table expression

  bool has_column(std::string_view column) const;
};

struct SelectScope {
  NodeId select = kNoNode;
  std::vector<FromItem> items;    // source order, join groups flattened
  bool outer_join = false;        // LEFT/RIGHT/FULL anywhere in FROM
  std::vector<NodeId> conjuncts;  // WHERE split on AND, parens removed
};

/// Nearest Select node enclosing `id`, or kNoNode.
NodeId enclosing_select(const QueryAst& ast, NodeId id);

SelectScope analyze_select(const QueryAst& ast, NodeId select, const DatabaseSchema& schema);

/// Index of the item referring to `table` (alias match first, then table
/// name). nullopt when absent; Error{Plan} when ambiguous.
std::optional<std::size_t> find_item(const SelectScope& scope, std::string_view table);

bool contains_kind(const QueryAst& ast, NodeId id, NodeKind kind);

/// True when `conjunct` only reads columns of `target`, is ingredient-free
/// and deterministic. `others` are the remaining items in scope.
bool pushable(const QueryAst& ast, NodeId conjunct, const FromItem& target,
              const std::vector<const FromItem*>& others, const DatabaseSchema& schema);

/// "WITH ... " covering the common table expressions visible at `id`, or "".
std::string with_prefix(const QueryAst& ast, NodeId id, const Substitutions& subs);

/// Lower-case names of the common table expressions visible at `id`.
std::vector<std::string> visible_cte_names(const QueryAst& ast, NodeId id);

/// Builds an item for a table that is not yet in FROM.
FromItem introduced_item(const DatabaseSchema& schema, const std::string& table);

/// Column of a simple `SELECT col FROM table ...` subquery.
std::optional<TableColumn> single_column_source(const QueryAst& ast, NodeId subquery);

}  // namespace hql::detail
