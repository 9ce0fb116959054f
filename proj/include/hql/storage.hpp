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

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "hql/error.hpp"
#include "hql/value.hpp"

struct sqlite3;

namespace hql {

inline constexpr std::string_view kDocumentsTable = "documents";

struct ColumnInfo {
  std::string name;
  std::string type;  // declared type, may be empty
};

struct TableSchema {
  std::string name;
  std::string create_sql;  // as stored in sqlite_master
  std::vector<ColumnInfo> columns;
  bool is_virtual = false;
  bool is_temp = false;

  bool has_column(std::string_view column) const;
  /// Declared column name with the catalog's spelling, or empty.
  std::string find_column(std::string_view column) const;
};

struct DatabaseSchema {
  std::vector<TableSchema> tables;
  /// Case-insensitive lookup; nullptr when absent.
  const TableSchema* find(std::string_view table) const;
};

enum class FtsTokenizer { Trigram, Unicode61 };

struct Document {
  std::string title;
  std::string content;
};

/// One SQLite connection. Move-only; closes on destruction.
class Database {
 public:
  /// Opens an existing database file. Throws Error{Io} when the file is
  /// missing and Error{NotADatabase} when it is not SQLite.
  static Database open(const std::string& path);
  /// Opens or creates a file for writing.
  static Database create(const std::string& path);
  static Database open_memory();

  Database(Database&& other) noexcept;
  Database& operator=(Database&& other) noexcept;
  Database(const Database&) = delete;
  Database& operator=(const Database&) = delete;
  ~Database();

  /// Runs every statement in `sql` and returns the rows of the last one.
  /// Throws Error{Sql} with the engine message.
  Table query(std::string_view sql, const std::vector<Value>& params = {}) const;
  /// Runs ingredient-free SQL; alias of query().
  Table execute_native(std::string_view sql) const { return query(sql); }
  /// Runs statements that return no rows.
  void exec(std::string_view sql) const;

  DatabaseSchema schema() const;
  bool documents_present() const;
  /// Names of every table in the temp namespace.
  std::vector<std::string> temp_tables() const;

  const std::string& path() const { return path_; }
  sqlite3* handle() const { return db_; }

 private:
  Database(sqlite3* db, std::string path) : db_(db), path_(std::move(path)) {}
  sqlite3* db_ = nullptr;
  std::string path_;
};

/// Creates the `documents` FTS5 table when missing and inserts `docs`.
/// Returns the number of rows inserted.
std::size_t ingest_documents(const Database& db, const std::vector<Document>& docs,
                             FtsTokenizer tokenizer = FtsTokenizer::Trigram);

/// Top `k` documents for an FTS5 MATCH expression, best first. Columns:
/// title, content, rank. Throws Error{FtsSyntax} on a malformed expression.
Table bm25_search(const Database& db, std::string_view match_query, int k);

/// FTS5 bm25() defaults, reported in traces.
inline constexpr double kBm25K1 = 1.2;
inline constexpr double kBm25B = 0.75;

/// Reads JSON lines of {title, content}. Throws Error{Ingest} naming the line.
std::vector<Document> read_documents_jsonl(const std::string& path);

struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// RFC 4180 CSV with a header row. Throws Error{Ingest} naming the line of a
/// ragged row or an unterminated quote.
CsvData parse_csv(std::string_view text);
CsvData read_csv(const std::string& path);

struct CsvIngestOptions {
  bool index_column = true;  // prepend an "index" INTEGER column (0-based)
};

/// Creates `table` with inferred column types (INTEGER, REAL, else TEXT;
/// empty cells are NULL and do not affect inference) and inserts all rows.
std::size_t ingest_table(const Database& db, const std::string& table, const CsvData& data,
                         const CsvIngestOptions& options = {});

/// A temp table owned by one execution.
struct SessionTable {
  std::string name;
  std::vector<std::string> columns;
  std::string origin;  // SQL that produced it
  std::size_t row_count = 0;
};

/// Owns the temp tables created during one execution and drops them on
/// destruction, including during stack unwinding.
class SessionScope {
 public:
  explicit SessionScope(const Database& db) : db_(db) {}
  SessionScope(const SessionScope&) = delete;
  SessionScope& operator=(const SessionScope&) = delete;
  ~SessionScope();

  /// CREATE TEMP TABLE <fresh name> AS <subquery>. Throws Error{Storage}.
  SessionTable materialize(std::string_view subquery, std::string_view prefix = "sess");

  /// Creates a temp table with the given columns and rows.
  SessionTable create(std::string_view prefix, const std::vector<std::string>& columns,
                      const std::vector<std::vector<Value>>& rows);

  const std::vector<SessionTable>& tables() const { return tables_; }

 private:
  std::string fresh_name(std::string_view prefix);
  const Database& db_;
  std::vector<SessionTable> tables_;
};

}  // namespace hql
