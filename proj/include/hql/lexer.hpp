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
#include <vector>

#include "hql/error.hpp"

namespace hql {

enum class TokenType {
  Identifier,        // bare word; keywords are identifiers too
  QuotedIdentifier,  // "x", `x`, [x]
  String,            // 'x'
  Number,
  Blob,              // X'..'
  Parameter,         // ?, ?1, :name, @name, $name
  Operator,          // punctuation and operators
  OpenIngredient,    // {{
  CloseIngredient,   // }}
  End,
};

struct Token {
  TokenType type = TokenType::End;
  std::string_view text;  // raw slice of the source
  Span span;

  bool is_keyword(std::string_view kw) const;
  bool is_op(std::string_view op) const {
    return type == TokenType::Operator && text == op;
  }
};

/// Splits `source` into tokens, dropping whitespace and comments. The last
/// token is always End. Throws SyntaxError on unterminated literals,
/// comments, or stray characters.
std::vector<Token> tokenize(std::string_view source);

/// Unquotes a String or QuotedIdentifier token text; returns other text as is.
std::string unquote(std::string_view raw);

/// Token stream normalized for whitespace-insensitive comparison: bare words
/// upper-cased, everything else verbatim.
std::vector<std::string> normalized_tokens(std::string_view source);

}  // namespace hql
