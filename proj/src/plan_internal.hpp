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

// Ingredient input resolution shared by plan() and execute().

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hql/planner.hpp"
#include "scope.hpp"

namespace hql::detail {

/// A column that feeds an ingredient, with the predicates that may filter it.
struct ColumnSource {
  FromItem item;
  std::string column;         // catalog spelling when known
  bool introduced = false;    // not in FROM; joined in by the substitution
  bool same_scope = false;    // conjuncts of `scope` apply
  SelectScope scope;
  std::vector<FromItem> others;
};

/// Target of a Map or custom scalar call. Throws Error{Plan}.
ColumnSource resolve_map_target(const QueryAst& ast, const IngredientCall& call,
                                const DatabaseSchema& schema);

struct JoinSides {
  ColumnSource left;
  ColumnSource right;
  bool from_item = false;
  NodeId left_subquery = kNoNode;  // left values come from this subquery
};

JoinSides resolve_join(const QueryAst& ast, const IngredientCall& call, const DatabaseSchema& schema);

/// `SELECT <col> AS "value" FROM <table> WHERE <pushed conjuncts>`.
PushdownQuery build_pushdown(const QueryAst& ast, NodeId at, const ColumnSource& source,
                             bool pushdown, const DatabaseSchema& schema,
                             const Substitutions& subs);

/// SQL reading a whole `table::column`, used for QA context and options.
std::string column_sql(const QueryAst& ast, NodeId at, const TableColumn& tc,
                       const DatabaseSchema& schema, const Substitutions& subs);

/// Throws Error{Plan} unless `tc` names a known table (or visible common
/// table expression) and, when the columns are known, a known column.
void check_table_column(const QueryAst& ast, NodeId at, const TableColumn& tc,
                        const DatabaseSchema& schema);

bool is_scalar_call(const IngredientCall& call);
bool is_aggregate_call(const IngredientCall& call);

}  // namespace hql::detail
