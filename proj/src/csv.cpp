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

#include <fstream>
#include <sstream>

#include "hql/storage.hpp"

namespace hql {

CsvData parse_csv(std::string_view text) {
  CsvData out;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    bool blank = record.size() == 1 && record[0].empty();
    if (!blank) {
      if (out.header.empty()) {
        out.header = std::move(record);
      } else if (record.size() != out.header.size()) {
        throw Error(ErrorCode::Ingest, "line " + std::to_string(record_line) + ": expected " +
                                           std::to_string(out.header.size()) + " fields, got " +
                                           std::to_string(record.size()));
      } else {
        out.rows.push_back(std::move(record));
      }
    }
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          throw Error(ErrorCode::Ingest,
                      "line " + std::to_string(line) + ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::Ingest, "line " + std::to_string(record_line) + ": unterminated quote");
  }
  if (field_started || !record.empty()) end_record();
  if (out.header.empty()) throw Error(ErrorCode::Ingest, "line 1: missing header row");
  return out;
}

CsvData read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_csv(buf.str());
  } catch (const Error& e) {
    throw Error(ErrorCode::Ingest, path + ": " + e.what());
  }
}

namespace {

enum class ColumnType { Integer, Real, Text };

ColumnType infer(const CsvData& data, std::size_t col) {
  ColumnType type = ColumnType::Integer;
  bool any = false;
  for (const auto& row : data.rows) {
    const std::string& cell = row[col];
    if (cell.empty()) continue;
    any = true;
    Value v = coerce_scalar(cell);
    if (std::holds_alternative<std::int64_t>(v)) continue;
    if (std::holds_alternative<double>(v)) {
      type = ColumnType::Real;
      continue;
    }
    return ColumnType::Text;
  }
  return any ? type : ColumnType::Text;
}

const char* type_name(ColumnType t) {
  switch (t) {
    case ColumnType::Integer: return "INTEGER";
    case ColumnType::Real: return "REAL";
    case ColumnType::Text: return "TEXT";
  }
  return "TEXT";
}

}  // namespace

std::size_t ingest_table(const Database& db, const std::string& table, const CsvData& data,
                         const CsvIngestOptions& options) {
  std::vector<ColumnType> types;
  for (std::size_t c = 0; c < data.header.size(); ++c) types.push_back(infer(data, c));

  // Layout mirrors the pandas to_sql CREATE statement.
  std::string create = "CREATE TABLE " + quote_ident(table) + " (\n";
  std::vector<std::string> defs;
  if (options.index_column) defs.push_back(quote_ident("index") + " INTEGER");
  for (std::size_t c = 0; c < data.header.size(); ++c) {
    defs.push_back(quote_ident(data.header[c]) + " " + type_name(types[c]));
  }
  for (std::size_t i = 0; i < defs.size(); ++i) {
    if (i) create += ",\n  ";
    create += defs[i];
  }
  create += "\n)";

  std::string marks;
  for (std::size_t i = 0; i < defs.size(); ++i) marks += i ? ", ?" : "?";
  std::string insert = "INSERT INTO " + quote_ident(table) + " VALUES (" + marks + ")";

  try {
    db.exec("BEGIN");
    db.exec(create);
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
      std::vector<Value> row;
      if (options.index_column) row.emplace_back(static_cast<std::int64_t>(r));
      for (std::size_t c = 0; c < data.header.size(); ++c) {
        const std::string& cell = data.rows[r][c];
        if (cell.empty()) {
          row.emplace_back(std::monostate{});
        } else if (types[c] == ColumnType::Text) {
          row.emplace_back(cell);
        } else {
          Value v = coerce_scalar(cell);
          if (types[c] == ColumnType::Real && std::holds_alternative<std::int64_t>(v)) {
            v = static_cast<double>(std::get<std::int64_t>(v));
          }
          row.push_back(std::move(v));
        }
      }
      db.query(insert, row);
    }
    db.exec("COMMIT");
  } catch (const Error& e) {
    try {
      db.exec("ROLLBACK");
    } catch (const Error&) {
    }
    throw Error(ErrorCode::Storage, "cannot ingest table '" + table + "': " + e.what());
  }
  return data.rows.size();
}

}  // namespace hql
