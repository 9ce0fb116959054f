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

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hql/error.hpp"

namespace hql {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

// Child layout per kind (children are always in source order):
//   Statement      [WithClause] (Select|Compound|Values) [OrderByClause] [LimitClause]
//   WithClause     Cte+                                  flags: Recursive
//   Cte            [NameList] Statement                  text: name
//   Compound       core (CompoundOp core)+
//   CompoundOp                                           text: "UNION ALL" etc.
//   Select         ResultList [FromClause] [WhereClause] [GroupByClause] [HavingClause]
//   Values         RowValue+
//   ResultList     ResultColumn+
//   ResultColumn   (expr|Star) [Alias]
//   Star                                                 aux: qualifier
//   Alias                                                text: name; flags: HasAs
//   FromClause     item (JoinOp item [OnClause|UsingClause])*
//   JoinGroup      same as FromClause, parenthesized
//   JoinOp                                               text: "," or "LEFT JOIN" etc.
//   OnClause       expr;  UsingClause NameList;  NameList Name+
//   TableRef       [Alias]                               text: table; aux: schema
//   TableFunction  expr* [Alias]                         text: function name
//   DerivedTable   Statement [Alias]
//   WhereClause / HavingClause  expr
//   GroupByClause  expr+;  OrderByClause OrderTerm+;  OrderTerm expr
//   LimitClause    expr [expr]                           flags: OffsetComma
//   Binary         lhs rhs [escape]                      text: operator
//   Unary / Postfix / Collate / Cast / Paren / FilterClause  one child
//   Between        expr low high;  In  lhs (InList|Subquery|TableRef)
//   Function       args* [FilterClause]                  text: name
//   Subquery / Exists  Statement;  Case [base] When+ [Else]; When cond result
//   Literal / ColumnRef / Parameter / Name               leaves
//   Ingredient     IngredientArg*                        text: name
//   IngredientArg  value                                 text: keyword or ""
enum class NodeKind : std::uint8_t {
  Statement,
  WithClause,
  Cte,
  Compound,
  CompoundOp,
  Select,
  Values,
  ResultList,
  ResultColumn,
  Star,
  Alias,
  FromClause,
  JoinGroup,
  JoinOp,
  OnClause,
  UsingClause,
  NameList,
  Name,
  TableRef,
  TableFunction,
  DerivedTable,
  WhereClause,
  GroupByClause,
  HavingClause,
  OrderByClause,
  OrderTerm,
  LimitClause,
  Binary,
  Unary,
  Postfix,
  Between,
  In,
  InList,
  Collate,
  Cast,
  Paren,
  RowValue,
  Function,
  FilterClause,
  Subquery,
  Exists,
  Case,
  When,
  Else,
  Literal,
  ColumnRef,
  Parameter,
  Ingredient,
  IngredientArg,
};

std::string_view to_string(NodeKind kind);

namespace node_flags {
inline constexpr std::uint32_t kHasAs = 1u << 0;
inline constexpr std::uint32_t kDistinct = 1u << 1;
inline constexpr std::uint32_t kAll = 1u << 2;
inline constexpr std::uint32_t kNot = 1u << 3;
inline constexpr std::uint32_t kAsc = 1u << 4;
inline constexpr std::uint32_t kDesc = 1u << 5;
inline constexpr std::uint32_t kNullsFirst = 1u << 6;
inline constexpr std::uint32_t kNullsLast = 1u << 7;
inline constexpr std::uint32_t kRecursive = 1u << 8;
inline constexpr std::uint32_t kMaterialized = 1u << 9;
inline constexpr std::uint32_t kNotMaterialized = 1u << 10;
inline constexpr std::uint32_t kStarArg = 1u << 11;
inline constexpr std::uint32_t kHasBase = 1u << 12;
inline constexpr std::uint32_t kOffsetComma = 1u << 13;
inline constexpr std::uint32_t kOffset = 1u << 14;
inline constexpr std::uint32_t kSemicolon = 1u << 15;
inline constexpr std::uint32_t kNotIndexed = 1u << 16;
}  // namespace node_flags

enum class LiteralClass : std::uint8_t { String, Number, Null, Boolean, Blob, Time };

struct Node {
  NodeKind kind{};
  Span span;
  std::string text;  // raw token text (operator, name, literal) as written
  std::string aux;   // qualifier / schema / type name / indexed-by name
  std::uint32_t flags = 0;
  LiteralClass literal = LiteralClass::String;
  NodeId parent = kNoNode;
  std::vector<NodeId> children;

  bool has(std::uint32_t flag) const { return (flags & flag) != 0; }
};

enum class IngredientKind : std::uint8_t { Map, QA, Join, Validate, Custom };
std::string_view to_string(IngredientKind kind);

/// How a user-registered ingredient behaves: per value like Map, or over a
/// table subset like QA.
enum class CustomClass : std::uint8_t { Scalar, Aggregate };

/// Syntactic position an ingredient node occupies.
enum class SyntacticContext : std::uint8_t {
  ComparisonOperand,
  SelectItem,
  TableExpression,
  JoinCondition,
  Predicate,
  GroupBy,
  OrderBy,
  Argument,
  Other,
};
std::string_view to_string(SyntacticContext ctx);

/// A `'table::column'` reference.
struct TableColumn {
  std::string table;
  std::string column;
  std::string str() const { return table + "::" + column; }
  friend bool operator==(const TableColumn&, const TableColumn&) = default;
};

/// Parses "table::column"; nullopt when either side is empty or the
/// separator is missing.
std::optional<TableColumn> parse_table_column(std::string_view text);

struct IngredientArg {
  enum class Kind : std::uint8_t { String, Subquery, Number, Boolean };
  std::string keyword;  // empty for positional
  Kind kind = Kind::String;
  std::string value;    // unquoted string / raw number / TRUE|FALSE
  NodeId node = kNoNode;  // the value node
};

struct IngredientCall {
  NodeId node = kNoNode;
  IngredientKind kind = IngredientKind::Map;
  std::string name;  // as written
  std::optional<CustomClass> custom_class;
  std::string question;
  // Map target / Join left side / QA context column.
  std::optional<TableColumn> target_column;
  // QA options, Join right side, Map output constraint.
  std::optional<TableColumn> options;
  // QA/Validate context or Join left side given as a subquery; the node is a
  // Subquery whose Statement may itself contain ingredient nodes.
  NodeId context_subquery = kNoNode;
  std::vector<IngredientArg> raw_args;
  SyntacticContext context = SyntacticContext::Other;
  Span span;
};

/// Resolves names of user-registered ingredients at parse time.
class CustomNameLookup {
 public:
  virtual ~CustomNameLookup() = default;
  virtual std::optional<CustomClass> lookup(std::string_view name) const = 0;
};

/// Immutable parse of one superset-SQL query. Cheap to copy; safe to share
/// across threads.
class QueryAst {
 public:
  QueryAst() = default;

  const std::string& text() const;
  NodeId root() const;
  const Node& node(NodeId id) const;
  std::size_t size() const;
  /// Ingredient calls in depth-first postorder (innermost first).
  const std::vector<IngredientCall>& ingredients() const;
  const IngredientCall* ingredient_at(NodeId id) const;

  /// Source slice covered by `id`.
  std::string_view source(NodeId id) const;
  /// True when `ancestor` is `id` or one of its ancestors.
  bool is_within(NodeId id, NodeId ancestor) const;

  struct Data {
    std::string text;
    std::vector<Node> nodes;
    NodeId root = kNoNode;
    std::vector<IngredientCall> ingredients;
  };
  explicit QueryAst(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

 private:
  std::shared_ptr<const Data> data_;
};

/// Parses superset-SQL text. Throws SyntaxError (with byte span) on malformed
/// input, unbalanced braces, or an unknown ingredient name.
QueryAst parse_query(std::string_view text, const CustomNameLookup* custom = nullptr);

/// Depth-first postorder list of ingredient calls: nested calls precede the
/// calls that enclose them.
std::vector<IngredientCall> extract_ingredients(const QueryAst& ast);

/// Replacement text per node id. Keys may be ingredient nodes or any other
/// node the planner rewrites.
using Substitutions = std::map<NodeId, std::string>;

/// Renders `id` (default: the whole query) from source, splicing in
/// substitutions.
std::string render(const QueryAst& ast, const Substitutions& subs, NodeId id = kNoNode);

/// Renders native SQL. Throws MissingSubstitution naming the first ingredient
/// node without a replacement.
std::string render_native(const QueryAst& ast, const Substitutions& subs, NodeId id = kNoNode);

/// Canonical single-line SQL rebuilt from the tree alone (not from source
/// slices). Keywords upper-cased, tokens separated by single spaces.
std::string format_query(const QueryAst& ast);

/// JSON debug dump: {kind, span, text, children}.
nlohmann::json ast_to_json(const QueryAst& ast);

enum class HintKind : std::uint8_t { None, Boolean, ExampleLiteral, Numeric };
std::string_view to_string(HintKind kind);

struct OutputHint {
  HintKind kind = HintKind::None;
  std::string example;  // ExampleLiteral value, unquoted
  NodeId source_node = kNoNode;
  friend bool operator==(const OutputHint&, const OutputHint&) = default;
};

/// Infers the expected output shape of `call` from where it sits in the query.
OutputHint infer_output_hint(const QueryAst& ast, const IngredientCall& call);

/// Helpers shared by the planner.
bool is_comparison_operator(std::string_view op);
/// Skips enclosing Paren nodes upward.
NodeId effective_parent(const QueryAst& ast, NodeId id);

}  // namespace hql
