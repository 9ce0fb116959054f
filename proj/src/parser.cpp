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

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <utility>

#include "hql/ast.hpp"
#include "hql/lexer.hpp"
#include "hql/value.hpp"

namespace hql {

namespace {

namespace nf = node_flags;

constexpr int kMaxDepth = 200;

// Words that never start or continue an implicit alias or bare column name.
constexpr std::array<std::string_view, 56> kReserved = {
    "ALL",      "AND",     "AS",       "ASC",        "BETWEEN",   "BY",
    "CASE",     "CAST",    "COLLATE",  "CROSS",      "DESC",      "DISTINCT",
    "ELSE",     "END",     "ESCAPE",   "EXCEPT",     "EXISTS",    "FROM",
    "FULL",     "GLOB",    "GROUP",    "HAVING",     "IN",        "INDEXED",
    "INNER",    "INTERSECT", "IS",     "ISNULL",     "JOIN",      "LEFT",
    "LIKE",     "LIMIT",   "MATCH",    "NATURAL",    "NOT",       "NOTNULL",
    "NULL",     "OFFSET",  "ON",       "OR",         "ORDER",     "OUTER",
    "REGEXP",   "RIGHT",   "SELECT",   "THEN",       "UNION",     "USING",
    "VALUES",   "WHEN",    "WHERE",    "WINDOW",     "WITH",      "RAISE",
    "TRUE",     "FALSE"};

bool is_reserved(std::string_view word) {
  return std::any_of(kReserved.begin(), kReserved.end(),
                     [&](std::string_view r) { return iequals(r, word); });
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, const CustomNameLookup* custom)
      : text_(text), custom_(custom) {}

  QueryAst run() {
    if (trim(text_).empty()) throw SyntaxError("empty query", {0, text_.size()});
    toks_ = tokenize(text_);
    NodeId root = parse_statement();
    if (cur().is_op(";")) {
      nodes_[root].flags |= nf::kSemicolon;
      advance();
      nodes_[root].span.end = last_end_;
    }
    if (cur().type != TokenType::End) fail("unexpected token after end of query");

    auto data = std::make_shared<QueryAst::Data>();
    data->text = std::string(text_);
    data->root = root;
    data->nodes = std::move(nodes_);
    collect_ingredients(*data);
    return QueryAst(std::move(data));
  }

 private:
  // ---- token helpers -------------------------------------------------------

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t n = 1) const {
    return toks_[std::min(pos_ + n, toks_.size() - 1)];
  }
  void advance() {
    if (cur().type != TokenType::End) {
      last_end_ = cur().span.end;
      ++pos_;
    }
  }
  bool at_kw(std::string_view kw) const { return cur().is_keyword(kw); }
  bool accept_kw(std::string_view kw) {
    if (!at_kw(kw)) return false;
    advance();
    return true;
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail("expected " + std::string(kw));
  }
  bool at_op(std::string_view op) const { return cur().is_op(op); }
  bool accept_op(std::string_view op) {
    if (!at_op(op)) return false;
    advance();
    return true;
  }
  void expect_op(std::string_view op) {
    if (!accept_op(op)) fail("expected '" + std::string(op) + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = cur();
    std::string near = t.type == TokenType::End ? "end of input" : "'" + std::string(t.text) + "'";
    throw SyntaxError(msg + " near " + near, t.span);
  }

  struct DepthGuard {
    explicit DepthGuard(Parser& p) : p_(p) {
      if (++p_.depth_ > kMaxDepth) p_.fail("query nesting too deep");
    }
    ~DepthGuard() { --p_.depth_; }
    Parser& p_;
  };

  // ---- node helpers --------------------------------------------------------

  NodeId open(NodeKind kind) { return open_at(kind, cur().span.begin); }
  NodeId open_at(NodeKind kind, std::size_t begin) {
    Node n;
    n.kind = kind;
    n.span = {begin, begin};
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
  }
  NodeId close(NodeId id) {
    nodes_[id].span.end = std::max(last_end_, nodes_[id].span.begin);
    return id;
  }
  void adopt(NodeId parent, NodeId child) {
    nodes_[child].parent = parent;
    nodes_[parent].children.push_back(child);
  }
  NodeId leaf(NodeKind kind, const Token& t) {
    NodeId id = open_at(kind, t.span.begin);
    nodes_[id].text = std::string(t.text);
    nodes_[id].span.end = t.span.end;
    return id;
  }

  bool is_name_token(const Token& t) const {
    return (t.type == TokenType::Identifier && !is_reserved(t.text)) ||
           t.type == TokenType::QuotedIdentifier;
  }

  bool starts_statement() const {
    return at_kw("SELECT") || at_kw("WITH") || at_kw("VALUES");
  }

  // ---- statements ----------------------------------------------------------

  NodeId parse_statement() {
    DepthGuard guard(*this);
    NodeId id = open(NodeKind::Statement);
    if (at_kw("WITH")) adopt(id, parse_with());
    adopt(id, parse_compound());
    if (at_kw("ORDER")) adopt(id, parse_order_by());
    if (at_kw("LIMIT")) adopt(id, parse_limit());
    return close(id);
  }

  NodeId parse_with() {
    NodeId id = open(NodeKind::WithClause);
    expect_kw("WITH");
    if (accept_kw("RECURSIVE")) nodes_[id].flags |= nf::kRecursive;
    do {
      adopt(id, parse_cte());
    } while (accept_op(","));
    return close(id);
  }

  NodeId parse_cte() {
    if (!is_name_token(cur())) fail("expected common table expression name");
    NodeId id = open(NodeKind::Cte);
    nodes_[id].text = std::string(cur().text);
    advance();
    if (at_op("(")) adopt(id, parse_name_list());
    expect_kw("AS");
    if (at_kw("NOT") && peek().is_keyword("MATERIALIZED")) {
      advance();
      advance();
      nodes_[id].flags |= nf::kNotMaterialized;
    } else if (accept_kw("MATERIALIZED")) {
      nodes_[id].flags |= nf::kMaterialized;
    }
    expect_op("(");
    if (!starts_statement()) fail("expected SELECT in common table expression");
    adopt(id, parse_statement());
    expect_op(")");
    return close(id);
  }

  NodeId parse_name_list() {
    NodeId id = open(NodeKind::NameList);
    expect_op("(");
    do {
      if (!is_name_token(cur())) fail("expected column name");
      adopt(id, leaf(NodeKind::Name, cur()));
      advance();
    } while (accept_op(","));
    expect_op(")");
    return close(id);
  }

  bool at_compound_op() const {
    return at_kw("UNION") || at_kw("INTERSECT") || at_kw("EXCEPT");
  }

  NodeId parse_compound() {
    std::size_t begin = cur().span.begin;
    NodeId first = parse_core();
    if (!at_compound_op()) return first;
    NodeId id = open_at(NodeKind::Compound, begin);
    adopt(id, first);
    while (at_compound_op()) {
      NodeId op = open(NodeKind::CompoundOp);
      std::string word = upper(cur().text);
      advance();
      if (word == "UNION" && accept_kw("ALL")) word += " ALL";
      nodes_[op].text = word;
      adopt(id, close(op));
      adopt(id, parse_core());
    }
    return close(id);
  }

  NodeId parse_core() {
    if (at_kw("SELECT")) return parse_select();
    if (at_kw("VALUES")) return parse_values();
    fail("expected SELECT");
  }

  NodeId parse_values() {
    NodeId id = open(NodeKind::Values);
    expect_kw("VALUES");
    do {
      NodeId row = open(NodeKind::RowValue);
      expect_op("(");
      do {
        adopt(row, parse_expr());
      } while (accept_op(","));
      expect_op(")");
      adopt(id, close(row));
    } while (accept_op(","));
    return close(id);
  }

  NodeId parse_select() {
    NodeId id = open(NodeKind::Select);
    expect_kw("SELECT");
    if (accept_kw("DISTINCT")) {
      nodes_[id].flags |= nf::kDistinct;
    } else if (accept_kw("ALL")) {
      nodes_[id].flags |= nf::kAll;
    }
    NodeId list = open(NodeKind::ResultList);
    do {
      adopt(list, parse_result_column());
    } while (accept_op(","));
    adopt(id, close(list));

    if (at_kw("FROM")) {
      NodeId from = open(NodeKind::FromClause);
      advance();
      parse_join_chain(from);
      adopt(id, close(from));
    }
    if (at_kw("WHERE")) {
      NodeId where = open(NodeKind::WhereClause);
      advance();
      adopt(where, parse_expr());
      adopt(id, close(where));
    }
    if (at_kw("GROUP")) {
      NodeId group = open(NodeKind::GroupByClause);
      advance();
      expect_kw("BY");
      do {
        adopt(group, parse_expr());
      } while (accept_op(","));
      adopt(id, close(group));
    }
    if (at_kw("HAVING")) {
      NodeId having = open(NodeKind::HavingClause);
      advance();
      adopt(having, parse_expr());
      adopt(id, close(having));
    }
    if (at_kw("WINDOW")) fail("WINDOW clauses are not supported");
    return close(id);
  }

  NodeId parse_result_column() {
    NodeId id = open(NodeKind::ResultColumn);
    if (at_op("*")) {
      NodeId star = leaf(NodeKind::Star, cur());
      advance();
      adopt(id, star);
      return close(id);
    }
    if (is_name_token(cur()) && peek().is_op(".") && peek(2).is_op("*")) {
      NodeId star = open(NodeKind::Star);
      nodes_[star].aux = std::string(cur().text);
      advance();
      advance();
      advance();
      adopt(id, close(star));
      return close(id);
    }
    adopt(id, parse_expr());
    maybe_alias(id, /*allow_string=*/true);
    return close(id);
  }

  void maybe_alias(NodeId owner, bool allow_string) {
    if (at_kw("AS")) {
      NodeId alias = open(NodeKind::Alias);
      advance();
      const Token& t = cur();
      if (!(t.type == TokenType::Identifier || t.type == TokenType::QuotedIdentifier ||
            (allow_string && t.type == TokenType::String))) {
        fail("expected alias after AS");
      }
      nodes_[alias].text = std::string(t.text);
      nodes_[alias].flags |= nf::kHasAs;
      advance();
      adopt(owner, close(alias));
      return;
    }
    const Token& t = cur();
    if (is_name_token(t) || (allow_string && t.type == TokenType::String)) {
      adopt(owner, leaf(NodeKind::Alias, t));
      advance();
    }
  }

  // ---- FROM ----------------------------------------------------------------

  bool at_join_op() const {
    return at_op(",") || at_kw("JOIN") || at_kw("NATURAL") || at_kw("LEFT") ||
           at_kw("RIGHT") || at_kw("FULL") || at_kw("INNER") || at_kw("CROSS");
  }

  void parse_join_chain(NodeId owner) {
    adopt(owner, parse_table_item());
    while (at_join_op()) {
      NodeId op = open(NodeKind::JoinOp);
      if (accept_op(",")) {
        nodes_[op].text = ",";
      } else {
        std::string words;
        auto take = [&](std::string_view w) {
          if (!accept_kw(w)) return false;
          if (!words.empty()) words += ' ';
          words += w;
          return true;
        };
        take("NATURAL");
        if (take("LEFT") || take("RIGHT") || take("FULL")) {
          take("OUTER");
        } else {
          if (!take("INNER")) take("CROSS");
        }
        if (!take("JOIN")) fail("expected JOIN");
        nodes_[op].text = words;
      }
      adopt(owner, close(op));
      adopt(owner, parse_table_item());
      if (at_kw("ON")) {
        NodeId on = open(NodeKind::OnClause);
        advance();
        adopt(on, parse_expr());
        adopt(owner, close(on));
      } else if (at_kw("USING")) {
        NodeId using_clause = open(NodeKind::UsingClause);
        advance();
        adopt(using_clause, parse_name_list());
        adopt(owner, close(using_clause));
      }
    }
  }

  NodeId parse_table_item() {
    DepthGuard guard(*this);
    if (cur().type == TokenType::OpenIngredient) return parse_ingredient();
    if (at_op("(")) {
      std::size_t begin = cur().span.begin;
      advance();
      if (starts_statement()) {
        NodeId id = open_at(NodeKind::DerivedTable, begin);
        adopt(id, parse_statement());
        expect_op(")");
        maybe_alias(id, false);
        return close(id);
      }
      NodeId id = open_at(NodeKind::JoinGroup, begin);
      parse_join_chain(id);
      expect_op(")");
      return close(id);
    }
    if (!is_name_token(cur())) fail("expected table name");
    std::size_t begin = cur().span.begin;
    std::string first(cur().text);
    advance();
    std::string schema;
    std::string name = first;
    if (at_op(".")) {
      advance();
      if (!is_name_token(cur())) fail("expected table name after '.'");
      schema = first;
      name = std::string(cur().text);
      advance();
    }
    if (at_op("(")) {
      NodeId id = open_at(NodeKind::TableFunction, begin);
      nodes_[id].text = name;
      nodes_[id].aux = schema;
      advance();
      if (!at_op(")")) {
        do {
          adopt(id, parse_expr());
        } while (accept_op(","));
      }
      expect_op(")");
      maybe_alias(id, false);
      return close(id);
    }
    NodeId id = open_at(NodeKind::TableRef, begin);
    nodes_[id].text = name;
    nodes_[id].aux = schema;
    maybe_alias(id, false);
    if (at_kw("INDEXED")) fail("INDEXED BY is not supported");
    if (at_kw("NOT") && peek().is_keyword("INDEXED")) fail("NOT INDEXED is not supported");
    return close(id);
  }

  // ---- ORDER BY / LIMIT ----------------------------------------------------

  NodeId parse_order_by() {
    NodeId id = open(NodeKind::OrderByClause);
    expect_kw("ORDER");
    expect_kw("BY");
    do {
      NodeId term = open(NodeKind::OrderTerm);
      adopt(term, parse_expr());
      if (accept_kw("ASC")) {
        nodes_[term].flags |= nf::kAsc;
      } else if (accept_kw("DESC")) {
        nodes_[term].flags |= nf::kDesc;
      }
      if (accept_kw("NULLS")) {
        if (accept_kw("FIRST")) {
          nodes_[term].flags |= nf::kNullsFirst;
        } else {
          expect_kw("LAST");
          nodes_[term].flags |= nf::kNullsLast;
        }
      }
      adopt(id, close(term));
    } while (accept_op(","));
    return close(id);
  }

  NodeId parse_limit() {
    NodeId id = open(NodeKind::LimitClause);
    expect_kw("LIMIT");
    adopt(id, parse_expr());
    if (accept_kw("OFFSET")) {
      nodes_[id].flags |= nf::kOffset;
      adopt(id, parse_expr());
    } else if (accept_op(",")) {
      nodes_[id].flags |= nf::kOffsetComma;
      adopt(id, parse_expr());
    }
    return close(id);
  }

  // ---- expressions ---------------------------------------------------------

  NodeId binary(NodeId lhs, std::string op, NodeId rhs) {
    NodeId id = open_at(NodeKind::Binary, nodes_[lhs].span.begin);
    nodes_[id].text = std::move(op);
    adopt(id, lhs);
    adopt(id, rhs);
    return close(id);
  }

  NodeId parse_expr() {
    DepthGuard guard(*this);
    return parse_or();
  }

  NodeId parse_or() {
    NodeId lhs = parse_and();
    while (at_kw("OR")) {
      advance();
      lhs = binary(lhs, "OR", parse_and());
    }
    return lhs;
  }

  NodeId parse_and() {
    NodeId lhs = parse_not();
    while (at_kw("AND")) {
      advance();
      lhs = binary(lhs, "AND", parse_not());
    }
    return lhs;
  }

  NodeId parse_not() {
    if (at_kw("NOT")) {
      DepthGuard guard(*this);
      NodeId id = open(NodeKind::Unary);
      nodes_[id].text = "NOT";
      advance();
      adopt(id, parse_not());
      return close(id);
    }
    return parse_equality();
  }

  NodeId parse_equality() {
    NodeId lhs = parse_relational();
    while (true) {
      std::size_t begin = nodes_[lhs].span.begin;
      if (at_op("=") || at_op("==") || at_op("!=") || at_op("<>")) {
        std::string op(cur().text);
        advance();
        lhs = binary(lhs, op, parse_relational());
        continue;
      }
      if (at_kw("IS")) {
        advance();
        std::string op = "IS";
        if (accept_kw("NOT")) op += " NOT";
        if (accept_kw("DISTINCT")) {
          expect_kw("FROM");
          op += " DISTINCT FROM";
        }
        lhs = binary(lhs, op, parse_relational());
        continue;
      }
      if (at_kw("ISNULL") || at_kw("NOTNULL")) {
        NodeId id = open_at(NodeKind::Postfix, begin);
        nodes_[id].text = upper(cur().text);
        advance();
        adopt(id, lhs);
        lhs = close(id);
        continue;
      }
      bool negated = false;
      if (at_kw("NOT")) {
        const Token& next = peek();
        if (next.is_keyword("NULL")) {
          NodeId id = open_at(NodeKind::Postfix, begin);
          nodes_[id].text = "NOT NULL";
          advance();
          advance();
          adopt(id, lhs);
          lhs = close(id);
          continue;
        }
        if (!(next.is_keyword("IN") || next.is_keyword("LIKE") || next.is_keyword("GLOB") ||
              next.is_keyword("MATCH") || next.is_keyword("REGEXP") ||
              next.is_keyword("BETWEEN"))) {
          break;
        }
        advance();
        negated = true;
      }
      if (at_kw("IN")) {
        advance();
        lhs = parse_in(lhs, negated);
        continue;
      }
      if (at_kw("BETWEEN")) {
        advance();
        NodeId id = open_at(NodeKind::Between, begin);
        if (negated) nodes_[id].flags |= nf::kNot;
        adopt(id, lhs);
        adopt(id, parse_relational());
        expect_kw("AND");
        adopt(id, parse_relational());
        lhs = close(id);
        continue;
      }
      if (at_kw("LIKE") || at_kw("GLOB") || at_kw("MATCH") || at_kw("REGEXP")) {
        std::string op = upper(cur().text);
        advance();
        if (negated) op = "NOT " + op;
        NodeId id = open_at(NodeKind::Binary, begin);
        nodes_[id].text = op;
        adopt(id, lhs);
        adopt(id, parse_relational());
        if (op.ends_with("LIKE") && accept_kw("ESCAPE")) adopt(id, parse_relational());
        lhs = close(id);
        continue;
      }
      if (negated) fail("expected IN, LIKE, GLOB, MATCH, REGEXP or BETWEEN after NOT");
      break;
    }
    return lhs;
  }

  NodeId parse_in(NodeId lhs, bool negated) {
    NodeId id = open_at(NodeKind::In, nodes_[lhs].span.begin);
    if (negated) nodes_[id].flags |= nf::kNot;
    adopt(id, lhs);
    if (at_op("(")) {
      std::size_t begin = cur().span.begin;
      advance();
      if (starts_statement()) {
        NodeId sub = open_at(NodeKind::Subquery, begin);
        adopt(sub, parse_statement());
        expect_op(")");
        adopt(id, close(sub));
      } else {
        NodeId list = open_at(NodeKind::InList, begin);
        if (!at_op(")")) {
          do {
            adopt(list, parse_expr());
          } while (accept_op(","));
        }
        expect_op(")");
        adopt(id, close(list));
      }
    } else if (is_name_token(cur())) {
      NodeId ref = open(NodeKind::TableRef);
      std::string first(cur().text);
      advance();
      if (accept_op(".")) {
        if (!is_name_token(cur())) fail("expected table name");
        nodes_[ref].aux = first;
        nodes_[ref].text = std::string(cur().text);
        advance();
      } else {
        nodes_[ref].text = first;
      }
      adopt(id, close(ref));
    } else {
      fail("expected '(' or table name after IN");
    }
    return close(id);
  }

  NodeId parse_relational() {
    NodeId lhs = parse_bitwise();
    while (at_op("<") || at_op("<=") || at_op(">") || at_op(">=")) {
      std::string op(cur().text);
      advance();
      lhs = binary(lhs, op, parse_bitwise());
    }
    return lhs;
  }

  NodeId parse_bitwise() {
    NodeId lhs = parse_additive();
    while (at_op("&") || at_op("|") || at_op("<<") || at_op(">>")) {
      std::string op(cur().text);
      advance();
      lhs = binary(lhs, op, parse_additive());
    }
    return lhs;
  }

  NodeId parse_additive() {
    NodeId lhs = parse_multiplicative();
    while (at_op("+") || at_op("-")) {
      std::string op(cur().text);
      advance();
      lhs = binary(lhs, op, parse_multiplicative());
    }
    return lhs;
  }

  NodeId parse_multiplicative() {
    NodeId lhs = parse_concat();
    while (at_op("*") || at_op("/") || at_op("%")) {
      std::string op(cur().text);
      advance();
      lhs = binary(lhs, op, parse_concat());
    }
    return lhs;
  }

  NodeId parse_concat() {
    NodeId lhs = parse_unary();
    while (at_op("||") || at_op("->") || at_op("->>")) {
      std::string op(cur().text);
      advance();
      lhs = binary(lhs, op, parse_unary());
    }
    return lhs;
  }

  NodeId parse_unary() {
    if (at_op("-") || at_op("+") || at_op("~")) {
      DepthGuard guard(*this);
      NodeId id = open(NodeKind::Unary);
      nodes_[id].text = std::string(cur().text);
      advance();
      adopt(id, parse_unary());
      return close(id);
    }
    NodeId operand = parse_primary();
    while (at_kw("COLLATE")) {
      NodeId id = open_at(NodeKind::Collate, nodes_[operand].span.begin);
      advance();
      if (!(cur().type == TokenType::Identifier || cur().type == TokenType::QuotedIdentifier)) {
        fail("expected collation name");
      }
      nodes_[id].aux = std::string(cur().text);
      advance();
      adopt(id, operand);
      operand = close(id);
    }
    return operand;
  }

  NodeId literal(LiteralClass cls) {
    NodeId id = leaf(NodeKind::Literal, cur());
    nodes_[id].literal = cls;
    advance();
    return id;
  }

  NodeId parse_primary() {
    DepthGuard guard(*this);
    const Token& t = cur();
    switch (t.type) {
      case TokenType::Number: return literal(LiteralClass::Number);
      case TokenType::String: return literal(LiteralClass::String);
      case TokenType::Blob: return literal(LiteralClass::Blob);
      case TokenType::Parameter: {
        NodeId id = leaf(NodeKind::Parameter, t);
        advance();
        return id;
      }
      case TokenType::OpenIngredient: return parse_ingredient();
      case TokenType::CloseIngredient: fail("unbalanced ingredient braces");
      case TokenType::End: fail("unexpected end of input");
      default: break;
    }
    if (t.is_keyword("NULL")) return literal(LiteralClass::Null);
    if (t.is_keyword("TRUE") || t.is_keyword("FALSE")) return literal(LiteralClass::Boolean);
    if (t.is_keyword("CURRENT_TIME") || t.is_keyword("CURRENT_DATE") ||
        t.is_keyword("CURRENT_TIMESTAMP")) {
      return literal(LiteralClass::Time);
    }
    if (t.is_op("(")) return parse_parenthesized();
    if (t.is_keyword("EXISTS")) {
      NodeId id = open(NodeKind::Exists);
      advance();
      expect_op("(");
      if (!starts_statement()) fail("expected SELECT after EXISTS (");
      adopt(id, parse_statement());
      expect_op(")");
      return close(id);
    }
    if (t.is_keyword("CASE")) return parse_case();
    if (t.is_keyword("CAST")) return parse_cast();
    if (t.is_keyword("RAISE")) fail("RAISE is not supported");
    if (t.type == TokenType::Identifier && peek().is_op("(") && !is_reserved(t.text)) {
      return parse_function();
    }
    if (is_name_token(t)) return parse_column_ref();
    fail("unexpected token in expression");
  }

  NodeId parse_parenthesized() {
    std::size_t begin = cur().span.begin;
    advance();
    if (starts_statement()) {
      NodeId id = open_at(NodeKind::Subquery, begin);
      adopt(id, parse_statement());
      expect_op(")");
      return close(id);
    }
    NodeId first = parse_expr();
    if (at_op(",")) {
      NodeId id = open_at(NodeKind::RowValue, begin);
      adopt(id, first);
      while (accept_op(",")) adopt(id, parse_expr());
      expect_op(")");
      return close(id);
    }
    NodeId id = open_at(NodeKind::Paren, begin);
    adopt(id, first);
    expect_op(")");
    return close(id);
  }

  NodeId parse_case() {
    NodeId id = open(NodeKind::Case);
    expect_kw("CASE");
    if (!at_kw("WHEN")) {
      nodes_[id].flags |= nf::kHasBase;
      adopt(id, parse_expr());
    }
    if (!at_kw("WHEN")) fail("expected WHEN");
    while (at_kw("WHEN")) {
      NodeId when = open(NodeKind::When);
      advance();
      adopt(when, parse_expr());
      expect_kw("THEN");
      adopt(when, parse_expr());
      adopt(id, close(when));
    }
    if (at_kw("ELSE")) {
      NodeId other = open(NodeKind::Else);
      advance();
      adopt(other, parse_expr());
      adopt(id, close(other));
    }
    expect_kw("END");
    return close(id);
  }

  NodeId parse_cast() {
    NodeId id = open(NodeKind::Cast);
    expect_kw("CAST");
    expect_op("(");
    adopt(id, parse_expr());
    expect_kw("AS");
    std::size_t type_begin = cur().span.begin;
    if (cur().type != TokenType::Identifier) fail("expected type name");
    while (cur().type == TokenType::Identifier && !at_kw("AS")) advance();
    if (accept_op("(")) {
      if (cur().type != TokenType::Number) fail("expected type size");
      advance();
      if (accept_op(",")) {
        if (cur().type != TokenType::Number) fail("expected type size");
        advance();
      }
      expect_op(")");
    }
    nodes_[id].aux = std::string(text_.substr(type_begin, last_end_ - type_begin));
    expect_op(")");
    return close(id);
  }

  NodeId parse_function() {
    NodeId id = open(NodeKind::Function);
    nodes_[id].text = std::string(cur().text);
    advance();
    expect_op("(");
    if (at_op("*")) {
      nodes_[id].flags |= nf::kStarArg;
      advance();
    } else if (!at_op(")")) {
      if (accept_kw("DISTINCT")) nodes_[id].flags |= nf::kDistinct;
      do {
        adopt(id, parse_expr());
      } while (accept_op(","));
    }
    expect_op(")");
    if (at_kw("FILTER")) {
      NodeId filter = open(NodeKind::FilterClause);
      advance();
      expect_op("(");
      expect_kw("WHERE");
      adopt(filter, parse_expr());
      expect_op(")");
      adopt(id, close(filter));
    }
    if (at_kw("OVER")) fail("window functions are not supported");
    return close(id);
  }

  NodeId parse_column_ref() {
    NodeId id = open(NodeKind::ColumnRef);
    std::string first(cur().text);
    advance();
    if (at_op(".")) {
      advance();
      if (!is_name_token(cur())) fail("expected column name after '.'");
      std::string second(cur().text);
      advance();
      if (at_op(".")) {
        advance();
        if (!is_name_token(cur())) fail("expected column name after '.'");
        nodes_[id].aux = first + "." + second;
        nodes_[id].text = std::string(cur().text);
        advance();
      } else {
        nodes_[id].aux = first;
        nodes_[id].text = second;
      }
    } else {
      nodes_[id].text = first;
    }
    return close(id);
  }

  // ---- ingredients ---------------------------------------------------------

  NodeId parse_ingredient() {
    DepthGuard guard(*this);
    NodeId id = open(NodeKind::Ingredient);
    advance();  // {{
    if (cur().type != TokenType::Identifier) fail("expected ingredient name after '{{'");
    nodes_[id].text = std::string(cur().text);
    advance();
    expect_op("(");
    if (!at_op(")")) {
      do {
        adopt(id, parse_ingredient_arg());
      } while (accept_op(","));
    }
    expect_op(")");
    if (cur().type != TokenType::CloseIngredient) fail("expected '}}' to close ingredient");
    advance();
    return close(id);
  }

  NodeId parse_ingredient_arg() {
    NodeId id = open(NodeKind::IngredientArg);
    if (cur().type == TokenType::Identifier && peek().is_op("=")) {
      nodes_[id].text = std::string(cur().text);
      advance();
      advance();
    }
    const Token& t = cur();
    if (t.type == TokenType::String) {
      adopt(id, literal(LiteralClass::String));
    } else if (t.type == TokenType::Number) {
      adopt(id, literal(LiteralClass::Number));
    } else if (t.is_keyword("TRUE") || t.is_keyword("FALSE")) {
      adopt(id, literal(LiteralClass::Boolean));
    } else if (t.is_op("(") && (peek().is_keyword("SELECT") || peek().is_keyword("WITH") ||
                                peek().is_keyword("VALUES"))) {
      std::size_t begin = t.span.begin;
      advance();
      NodeId sub = open_at(NodeKind::Subquery, begin);
      adopt(sub, parse_statement());
      expect_op(")");
      adopt(id, close(sub));
    } else {
      fail("ingredient arguments must be string literals, numbers, booleans or subqueries");
    }
    return close(id);
  }

  void collect_ingredients(QueryAst::Data& data) {
    std::vector<NodeId> order;
    std::vector<std::pair<NodeId, bool>> stack{{data.root, false}};
    while (!stack.empty()) {
      auto [id, visited] = stack.back();
      stack.pop_back();
      if (visited) {
        if (data.nodes[id].kind == NodeKind::Ingredient) order.push_back(id);
        continue;
      }
      stack.push_back({id, true});
      const auto& kids = data.nodes[id].children;
      for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back({*it, false});
    }
    for (NodeId id : order) data.ingredients.push_back(interpret(data, id));
  }

  SyntacticContext context_of(const QueryAst::Data& data, NodeId id) const {
    NodeId child = id;
    NodeId p = data.nodes[id].parent;
    while (p != kNoNode && data.nodes[p].kind == NodeKind::Paren) {
      child = p;
      p = data.nodes[p].parent;
    }
    if (p == kNoNode) return SyntacticContext::Other;
    const Node& parent = data.nodes[p];
    switch (parent.kind) {
      case NodeKind::Binary:
        if (is_comparison_operator(parent.text)) return SyntacticContext::ComparisonOperand;
        if (parent.text == "AND" || parent.text == "OR") break;
        return SyntacticContext::Other;
      case NodeKind::In:
      case NodeKind::Between:
        return SyntacticContext::ComparisonOperand;
      case NodeKind::InList:
        return SyntacticContext::ComparisonOperand;
      case NodeKind::ResultColumn: return SyntacticContext::SelectItem;
      case NodeKind::FromClause:
      case NodeKind::JoinGroup: return SyntacticContext::TableExpression;
      case NodeKind::GroupByClause: return SyntacticContext::GroupBy;
      case NodeKind::OrderTerm: return SyntacticContext::OrderBy;
      case NodeKind::Function: return SyntacticContext::Argument;
      case NodeKind::Unary:
        if (parent.text == "NOT") break;
        return SyntacticContext::Other;
      case NodeKind::WhereClause:
      case NodeKind::HavingClause: return SyntacticContext::Predicate;
      case NodeKind::OnClause: return SyntacticContext::JoinCondition;
      default: return SyntacticContext::Other;
    }
    // Boolean connective: report the clause the predicate belongs to.
    (void)child;
    for (NodeId q = p; q != kNoNode; q = data.nodes[q].parent) {
      NodeKind k = data.nodes[q].kind;
      if (k == NodeKind::OnClause) return SyntacticContext::JoinCondition;
      if (k == NodeKind::WhereClause || k == NodeKind::HavingClause) {
        return SyntacticContext::Predicate;
      }
      if (k == NodeKind::ResultColumn) return SyntacticContext::SelectItem;
      if (k == NodeKind::Binary || k == NodeKind::Unary || k == NodeKind::Paren) continue;
      break;
    }
    return SyntacticContext::Other;
  }

  IngredientCall interpret(const QueryAst::Data& data, NodeId id) {
    const Node& n = data.nodes[id];
    IngredientCall call;
    call.node = id;
    call.name = n.text;
    call.span = n.span;
    call.context = context_of(data, id);

    auto error = [&](const std::string& msg) -> SyntaxError {
      return SyntaxError(n.text + ": " + msg, n.span);
    };

    if (iequals(n.text, "LLMMap")) {
      call.kind = IngredientKind::Map;
    } else if (iequals(n.text, "LLMQA")) {
      call.kind = IngredientKind::QA;
    } else if (iequals(n.text, "LLMJoin")) {
      call.kind = IngredientKind::Join;
    } else if (iequals(n.text, "LLMValidate")) {
      call.kind = IngredientKind::Validate;
    } else if (auto cls = custom_ ? custom_->lookup(n.text) : std::nullopt) {
      call.kind = IngredientKind::Custom;
      call.custom_class = *cls;
    } else {
      throw SyntaxError("unknown ingredient '" + n.text + "'", n.span);
    }

    std::vector<const IngredientArg*> positional;
    for (NodeId arg_id : n.children) {
      const Node& arg = data.nodes[arg_id];
      const Node& value = data.nodes[arg.children.front()];
      IngredientArg a;
      a.keyword = arg.text;
      a.node = arg.children.front();
      if (value.kind == NodeKind::Subquery) {
        a.kind = IngredientArg::Kind::Subquery;
        a.value = std::string(text_.substr(value.span.begin, value.span.size()));
      } else if (value.literal == LiteralClass::String) {
        a.kind = IngredientArg::Kind::String;
        a.value = unquote(value.text);
      } else if (value.literal == LiteralClass::Boolean) {
        a.kind = IngredientArg::Kind::Boolean;
        a.value = upper(value.text);
      } else {
        a.kind = IngredientArg::Kind::Number;
        a.value = value.text;
      }
      call.raw_args.push_back(std::move(a));
    }
    for (const auto& a : call.raw_args) {
      if (a.keyword.empty()) positional.push_back(&a);
    }

    auto column_arg = [&](const IngredientArg& a, std::string_view what) {
      if (a.kind != IngredientArg::Kind::String) {
        throw error(std::string(what) + " must be a 'table::column' string");
      }
      auto tc = parse_table_column(a.value);
      if (!tc) throw error(std::string(what) + " must be a 'table::column' string, got '" + a.value + "'");
      return *tc;
    };
    auto question_arg = [&](const IngredientArg& a) {
      if (a.kind != IngredientArg::Kind::String) throw error("question must be a string literal");
      return a.value;
    };
    auto source_arg = [&](const IngredientArg& a, std::string_view what) {
      if (a.kind == IngredientArg::Kind::Subquery) {
        call.context_subquery = a.node;
      } else {
        call.target_column = column_arg(a, what);
      }
    };

    for (const auto& a : call.raw_args) {
      if (a.keyword.empty()) continue;
      std::string kw = to_lower(a.keyword);
      bool custom = call.kind == IngredientKind::Custom;
      if (kw == "options") {
        if (call.kind == IngredientKind::Validate) throw error("options is not accepted");
        call.options = column_arg(a, "options");
      } else if (call.kind == IngredientKind::Join && kw == "right_on") {
        call.options = column_arg(a, "right_on");
      } else if (call.kind == IngredientKind::Join && kw == "left_on") {
        source_arg(a, "left_on");
      } else if (!custom) {
        throw error("unknown keyword argument '" + a.keyword + "'");
      }
    }

    switch (call.kind) {
      case IngredientKind::Map:
        if (positional.size() != 2) {
          throw error("expects ('question', 'table::column')");
        }
        call.question = question_arg(*positional[0]);
        call.target_column = column_arg(*positional[1], "target");
        break;
      case IngredientKind::QA:
      case IngredientKind::Validate:
        if (positional.empty() || positional.size() > 2) {
          throw error("expects ('question'[, context])");
        }
        call.question = question_arg(*positional[0]);
        if (positional.size() == 2) source_arg(*positional[1], "context");
        break;
      case IngredientKind::Join: {
        bool have_left = call.target_column || call.context_subquery != kNoNode;
        if (positional.size() > 2 || (have_left && positional.size() > 1)) {
          throw error("expects (['question',] left, options='table::column')");
        }
        std::size_t next = 0;
        if (positional.size() == 2 || (have_left && positional.size() == 1)) {
          call.question = question_arg(*positional[next++]);
        }
        if (next < positional.size()) source_arg(*positional[next], "left side");
        if (!call.target_column && call.context_subquery == kNoNode) {
          throw error("requires a left value set");
        }
        if (!call.options) throw error("requires options='table::column'");
        break;
      }
      case IngredientKind::Custom:
        if (positional.size() > 2) throw error("expects ('question'[, source])");
        if (!positional.empty()) call.question = question_arg(*positional[0]);
        if (positional.size() == 2) source_arg(*positional[1], "source");
        if (call.custom_class == CustomClass::Scalar && !call.target_column) {
          throw error("scalar ingredients need a 'table::column' source");
        }
        break;
    }
    return call;
  }

  std::string_view text_;
  const CustomNameLookup* custom_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t last_end_ = 0;
  int depth_ = 0;
  std::vector<Node> nodes_;
};

}  // namespace

QueryAst parse_query(std::string_view text, const CustomNameLookup* custom) {
  return Parser(text, custom).run();
}

}  // namespace hql
