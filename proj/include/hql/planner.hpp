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

#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "hql/ast.hpp"
#include "hql/ingredients.hpp"
#include "hql/storage.hpp"
#include "hql/value.hpp"

namespace hql {

enum class StepKind : std::uint8_t { NativeSubquery, Ingredient, Substitute, FinalQuery };
std::string_view to_string(StepKind kind);

struct PlanStep {
  StepKind kind = StepKind::FinalQuery;
  std::size_t ingredient = 0;  // index into QueryAst::ingredients()
  std::string sql;             // subquery / final SQL / replacement text
  std::string note;
};

struct ExecutionPlan {
  std::vector<PlanStep> steps;
  nlohmann::json to_json() const;
};

struct PlanOptions {
  bool pushdown = true;
  const CustomNameLookup* custom = nullptr;
};

/// Static plan with placeholder results. Throws Error{Plan} when an
/// ingredient names a table or column the database does not have.
ExecutionPlan plan(const QueryAst& ast, const DatabaseSchema& schema, const PlanOptions& options = {});

struct PushdownQuery {
  std::string sql;                  // selects the input column AS "value"
  std::vector<std::string> pushed;  // conjuncts copied into the WHERE clause
  std::string qualifier_sql;        // how the outer query refers to the source
  std::string column;               // catalog spelling
};

/// Input subset for a Map / custom scalar call, or the left side of a Join.
PushdownQuery pushdown_predicates(const QueryAst& ast, const IngredientCall& call,
                                  const DatabaseSchema& schema, const PlanOptions& options = {});

struct MapArtifact {
  std::string table;          // session table (value, result)
  std::string qualifier_sql;  // source reference in the outer query
  std::string column;
};

struct ScalarArtifact {
  Value value;
};

struct VerdictArtifact {
  bool value = false;
};

struct JoinLink {
  std::string qualifier_sql;
  std::string column;
  std::string table_sql;  // non-empty when the table must be joined in
};

struct JoinArtifact {
  std::string table;  // session table (left, right)
  JoinLink left;
  JoinLink right;
  bool from_item = true;  // false: rendered as EXISTS (...)
};

using IngredientArtifact = std::variant<MapArtifact, ScalarArtifact, VerdictArtifact, JoinArtifact>;

/// SQL text that replaces the ingredient node.
std::string substitution_text(const IngredientArtifact& artifact);

/// Replaces `call` with the artifact and re-parses. Throws
/// Error{TypeMismatch} when the artifact does not fit the call kind.
QueryAst substitute(const QueryAst& ast, const IngredientCall& call,
                    const IngredientArtifact& artifact, const CustomNameLookup* custom = nullptr);

}  // namespace hql
