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

#include "hql/ast.hpp"
#include "hql/lexer.hpp"
#include "hql/value.hpp"

namespace hql {

namespace {

NodeId strip_parens(const QueryAst& ast, NodeId id) {
  while (ast.node(id).kind == NodeKind::Paren) id = ast.node(id).children.front();
  return id;
}

// Literal text of `id` when it is a string/number literal, possibly signed.
std::optional<std::string> literal_example(const QueryAst& ast, NodeId id) {
  id = strip_parens(ast, id);
  const Node& n = ast.node(id);
  if (n.kind == NodeKind::Literal) {
    if (n.literal == LiteralClass::String) return unquote(n.text);
    if (n.literal == LiteralClass::Number) return n.text;
    return std::nullopt;
  }
  if (n.kind == NodeKind::Unary && (n.text == "-" || n.text == "+")) {
    const Node& inner = ast.node(strip_parens(ast, n.children.front()));
    if (inner.kind == NodeKind::Literal && inner.literal == LiteralClass::Number) {
      return (n.text == "-" ? "-" : "") + inner.text;
    }
  }
  return std::nullopt;
}

bool is_numeric_literal(const QueryAst& ast, NodeId id) {
  id = strip_parens(ast, id);
  const Node& n = ast.node(id);
  if (n.kind == NodeKind::Unary && (n.text == "-" || n.text == "+")) {
    return is_numeric_literal(ast, n.children.front());
  }
  return n.kind == NodeKind::Literal && n.literal == LiteralClass::Number;
}

bool is_boolean_literal(const QueryAst& ast, NodeId id) {
  const Node& n = ast.node(strip_parens(ast, id));
  return n.kind == NodeKind::Literal && n.literal == LiteralClass::Boolean;
}

bool is_arithmetic(std::string_view op) {
  return op == "+" || op == "-" || op == "*" || op == "/" || op == "%";
}

bool is_numeric_function(std::string_view name) {
  for (std::string_view f : {"SUM", "AVG", "TOTAL", "ABS", "ROUND"}) {
    if (iequals(name, f)) return true;
  }
  return false;
}

}  // namespace

OutputHint infer_output_hint(const QueryAst& ast, const IngredientCall& call) {
  OutputHint hint;
  NodeId parent = effective_parent(ast, call.node);
  if (parent == kNoNode) return hint;
  const Node& p = ast.node(parent);

  // The operand position of the ingredient within `p`, looking through parens.
  auto operand_index = [&]() -> std::size_t {
    for (std::size_t i = 0; i < p.children.size(); ++i) {
      if (ast.is_within(call.node, p.children[i])) return i;
    }
    return p.children.size();
  };

  switch (p.kind) {
    case NodeKind::Binary: {
      if (p.children.size() < 2) break;
      std::size_t me = operand_index();
      if (me > 1) break;
      NodeId other = p.children[1 - me];
      if (is_comparison_operator(p.text)) {
        if (is_boolean_literal(ast, other)) {
          hint.kind = HintKind::Boolean;
          hint.source_node = other;
        } else if (p.text != "IS" && p.text != "IS NOT") {
          if (auto example = literal_example(ast, other)) {
            hint.kind = HintKind::ExampleLiteral;
            hint.example = *example;
            hint.source_node = other;
          }
        }
      } else if (is_arithmetic(p.text)) {
        hint.kind = HintKind::Numeric;
        hint.source_node = parent;
      }
      break;
    }
    case NodeKind::In: {
      if (operand_index() != 0) break;
      const Node& rhs = ast.node(p.children[1]);
      if (rhs.kind == NodeKind::InList && !rhs.children.empty()) {
        if (auto example = literal_example(ast, rhs.children.front())) {
          hint.kind = HintKind::ExampleLiteral;
          hint.example = *example;
          hint.source_node = rhs.children.front();
        }
      }
      break;
    }
    case NodeKind::Between:
      if (operand_index() == 0 && is_numeric_literal(ast, p.children[1]) &&
          is_numeric_literal(ast, p.children[2])) {
        hint.kind = HintKind::Numeric;
        hint.source_node = parent;
      }
      break;
    case NodeKind::Function:
      if (is_numeric_function(p.text)) {
        hint.kind = HintKind::Numeric;
        hint.source_node = parent;
      }
      break;
    default:
      break;
  }
  return hint;
}

}  // namespace hql
