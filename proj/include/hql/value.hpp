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
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace hql {

struct Blob {
  std::string bytes;
  friend bool operator==(const Blob&, const Blob&) = default;
  friend auto operator<=>(const Blob&, const Blob&) = default;
};

/// One SQLite cell. monostate is NULL.
using Value = std::variant<std::monostate, std::int64_t, double, std::string, Blob>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

/// Text form used in prompts and reports. NULL renders as the empty string.
std::string to_text(const Value& v);

/// SQL literal that reproduces the value exactly inside a native query.
std::string sql_literal(const Value& v);

/// Single-quoted SQL string literal with '' escaping.
std::string quote_string(std::string_view s);

/// Double-quoted SQL identifier with "" escaping.
std::string quote_ident(std::string_view s);

/// Parses `text` as an integer or real when the whole string is numeric;
/// otherwise returns it as a string value.
Value coerce_scalar(std::string_view text);

nlohmann::json to_json(const Value& v);

/// Result set with column metadata.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;

  std::size_t row_count() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  friend bool operator==(const Table&, const Table&) = default;
};

nlohmann::json to_json(const Table& t);

/// Pipe-separated rendering: header row then data rows; each cell is
/// truncated to `cell_cap` characters (0 disables truncation).
std::string render_pipe_table(const Table& t, std::size_t cell_cap);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

}  // namespace hql
