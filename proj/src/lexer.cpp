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

#include "hql/lexer.hpp"

#include <array>
#include <cctype>

#include "hql/value.hpp"

namespace hql {

namespace {

bool is_ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c >= 0x80;
}

bool is_ident_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80;
}

constexpr std::array<std::string_view, 12> kMultiOps = {
    "->>", "||", "->", "<<", ">>", "<=", ">=", "==", "!=", "<>", "{{", "}}"};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_trivia();
      if (pos_ >= src_.size()) {
        out.push_back(Token{TokenType::End, src_.substr(src_.size()), {src_.size(), src_.size()}});
        return out;
      }
      out.push_back(next());
    }
  }

 private:
  void skip_trivia() {
    while (pos_ < src_.size()) {
      unsigned char c = src_[pos_];
      if (std::isspace(c)) {
        ++pos_;
      } else if (c == '-' && peek(1) == '-') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (c == '/' && peek(1) == '*') {
        std::size_t start = pos_;
        auto close = src_.find("*/", pos_ + 2);
        if (close == std::string_view::npos) {
          throw SyntaxError("unterminated block comment", {start, src_.size()});
        }
        pos_ = close + 2;
      } else {
        break;
      }
    }
  }

  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  Token make(TokenType type, std::size_t start) const {
    return Token{type, src_.substr(start, pos_ - start), {start, pos_}};
  }

  Token quoted(TokenType type, char close, bool doubled_escape) {
    std::size_t start = pos_++;
    while (pos_ < src_.size()) {
      if (src_[pos_] == close) {
        if (doubled_escape && peek(1) == close) {
          pos_ += 2;
          continue;
        }
        ++pos_;
        return make(type, start);
      }
      ++pos_;
    }
    throw SyntaxError(type == TokenType::String ? "unterminated string literal"
                                                : "unterminated quoted identifier",
                      {start, src_.size()});
  }

  Token number() {
    std::size_t start = pos_;
    if (src_[pos_] == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
      pos_ += 2;
      std::size_t digits = pos_;
      while (pos_ < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (pos_ == digits) throw SyntaxError("malformed hex literal", {start, pos_});
    } else {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (pos_ < src_.size() && src_[pos_] == '.') {
        ++pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t save = pos_;
        ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
        std::size_t digits = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ == digits) pos_ = save;
      }
    }
    if (pos_ < src_.size() && is_ident_start(static_cast<unsigned char>(src_[pos_]))) {
      throw SyntaxError("malformed number", {start, pos_ + 1});
    }
    return make(TokenType::Number, start);
  }

  Token next() {
    std::size_t start = pos_;
    unsigned char c = src_[pos_];
    if ((c == 'x' || c == 'X') && peek(1) == '\'') {
      ++pos_;
      Token t = quoted(TokenType::Blob, '\'', false);
      t.text = src_.substr(start, pos_ - start);
      t.span.begin = start;
      return t;
    }
    if (is_ident_start(c)) {
      while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return make(TokenType::Identifier, start);
    }
    if (std::isdigit(c) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      return number();
    }
    switch (c) {
      case '\'': return quoted(TokenType::String, '\'', true);
      case '"': return quoted(TokenType::QuotedIdentifier, '"', true);
      case '`': return quoted(TokenType::QuotedIdentifier, '`', true);
      case '[': return quoted(TokenType::QuotedIdentifier, ']', false);
      case '?':
        ++pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        return make(TokenType::Parameter, start);
      case ':':
      case '@':
      case '$':
        if (is_ident_start(static_cast<unsigned char>(peek(1)))) {
          ++pos_;
          while (pos_ < src_.size() && is_ident_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
          return make(TokenType::Parameter, start);
        }
        break;
      default:
        break;
    }
    for (std::string_view op : kMultiOps) {
      if (src_.substr(pos_, op.size()) == op) {
        pos_ += op.size();
        if (op == "{{") return make(TokenType::OpenIngredient, start);
        if (op == "}}") return make(TokenType::CloseIngredient, start);
        return make(TokenType::Operator, start);
      }
    }
    static constexpr std::string_view kSingle = "+-*/%&|~<>=,;().";
    if (kSingle.find(static_cast<char>(c)) != std::string_view::npos) {
      ++pos_;
      return make(TokenType::Operator, start);
    }
    if (c == '{' || c == '}') {
      throw SyntaxError("unbalanced ingredient braces", {start, start + 1});
    }
    throw SyntaxError("unexpected character", {start, start + 1});
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

bool Token::is_keyword(std::string_view kw) const {
  return type == TokenType::Identifier && iequals(text, kw);
}

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

std::string unquote(std::string_view raw) {
  if (raw.size() < 2) return std::string(raw);
  char open = raw.front();
  char close = open == '[' ? ']' : open;
  if ((open != '\'' && open != '"' && open != '`' && open != '[') || raw.back() != close) {
    return std::string(raw);
  }
  std::string out;
  out.reserve(raw.size() - 2);
  for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
    out.push_back(raw[i]);
    if (open != '[' && raw[i] == close && i + 2 < raw.size() && raw[i + 1] == close) ++i;
  }
  return out;
}

std::vector<std::string> normalized_tokens(std::string_view source) {
  std::vector<std::string> out;
  for (const Token& t : tokenize(source)) {
    if (t.type == TokenType::End) break;
    if (t.type == TokenType::Identifier) {
      std::string up(t.text);
      for (char& ch : up) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      out.push_back(std::move(up));
    } else {
      out.emplace_back(t.text);
    }
  }
  return out;
}

}  // namespace hql
