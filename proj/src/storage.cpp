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

#include "hql/storage.hpp"

#include <sqlite3.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>

#include <nlohmann/json.hpp>

namespace hql {

namespace {

struct StmtDeleter {
  void operator()(sqlite3_stmt* s) const { sqlite3_finalize(s); }
};
using Stmt = std::unique_ptr<sqlite3_stmt, StmtDeleter>;

[[noreturn]] void throw_sql(sqlite3* db, ErrorCode code = ErrorCode::Sql) {
  throw Error(code, sqlite3_errmsg(db));
}

void bind(sqlite3* db, sqlite3_stmt* stmt, int index, const Value& v) {
  int rc = SQLITE_OK;
  if (std::holds_alternative<std::monostate>(v)) {
    rc = sqlite3_bind_null(stmt, index);
  } else if (auto* i = std::get_if<std::int64_t>(&v)) {
    rc = sqlite3_bind_int64(stmt, index, *i);
  } else if (auto* d = std::get_if<double>(&v)) {
    rc = sqlite3_bind_double(stmt, index, *d);
  } else if (auto* s = std::get_if<std::string>(&v)) {
    rc = sqlite3_bind_text(stmt, index, s->data(), static_cast<int>(s->size()), SQLITE_TRANSIENT);
  } else {
    const auto& b = std::get<Blob>(v);
    rc = sqlite3_bind_blob(stmt, index, b.bytes.data(), static_cast<int>(b.bytes.size()),
                           SQLITE_TRANSIENT);
  }
  if (rc != SQLITE_OK) throw_sql(db);
}

Value column_value(sqlite3_stmt* stmt, int i) {
  switch (sqlite3_column_type(stmt, i)) {
    case SQLITE_INTEGER: return static_cast<std::int64_t>(sqlite3_column_int64(stmt, i));
    case SQLITE_FLOAT: return sqlite3_column_double(stmt, i);
    case SQLITE_TEXT: {
      const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt, i));
      return std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt, i)));
    }
    case SQLITE_BLOB: {
      const auto* p = static_cast<const char*>(sqlite3_column_blob(stmt, i));
      return Blob{std::string(p ? p : "", static_cast<std::size_t>(sqlite3_column_bytes(stmt, i)))};
    }
    default: return std::monostate{};
  }
}

bool only_trivia(std::string_view rest) {
  for (char c : rest) {
    if (!std::isspace(static_cast<unsigned char>(c)) && c != ';') return false;
  }
  return true;
}

}  // namespace

bool TableSchema::has_column(std::string_view column) const {
  return !find_column(column).empty();
}

std::string TableSchema::find_column(std::string_view column) const {
  for (const auto& c : columns) {
    if (iequals(c.name, column)) return c.name;
  }
  return {};
}

const TableSchema* DatabaseSchema::find(std::string_view table) const {
  for (const auto& t : tables) {
    if (iequals(t.name, table)) return &t;
  }
  return nullptr;
}

Database Database::open(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::Io, "cannot open database '" + path + "': no such file");
  }
  sqlite3* db = nullptr;
  int rc = sqlite3_open_v2(path.c_str(), &db, SQLITE_OPEN_READWRITE, nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = db ? sqlite3_errmsg(db) : "out of memory";
    sqlite3_close(db);
    throw Error(ErrorCode::Io, "cannot open database '" + path + "': " + msg);
  }
  Database out(db, path);
  char* err = nullptr;
  rc = sqlite3_exec(db, "SELECT count(*) FROM sqlite_master", nullptr, nullptr, &err);
  if (rc != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    if (rc == SQLITE_NOTADB) {
      throw Error(ErrorCode::NotADatabase, "'" + path + "' is not a database");
    }
    throw Error(ErrorCode::Io, "cannot read database '" + path + "': " + msg);
  }
  return out;
}

Database Database::create(const std::string& path) {
  sqlite3* db = nullptr;
  int rc = sqlite3_open_v2(path.c_str(), &db, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = db ? sqlite3_errmsg(db) : "out of memory";
    sqlite3_close(db);
    throw Error(ErrorCode::Io, "cannot create database '" + path + "': " + msg);
  }
  return Database(db, path);
}

Database Database::open_memory() {
  sqlite3* db = nullptr;
  if (sqlite3_open(":memory:", &db) != SQLITE_OK) {
    sqlite3_close(db);
    throw Error(ErrorCode::Storage, "cannot open in-memory database");
  }
  return Database(db, ":memory:");
}

Database::Database(Database&& other) noexcept
    : db_(std::exchange(other.db_, nullptr)), path_(std::move(other.path_)) {}

Database& Database::operator=(Database&& other) noexcept {
  if (this != &other) {
    sqlite3_close(db_);
    db_ = std::exchange(other.db_, nullptr);
    path_ = std::move(other.path_);
  }
  return *this;
}

Database::~Database() { sqlite3_close(db_); }

Table Database::query(std::string_view sql, const std::vector<Value>& params) const {
  Table result;
  const char* cursor = sql.data();
  const char* end = sql.data() + sql.size();
  bool ran = false;
  while (cursor < end && !only_trivia(std::string_view(cursor, end - cursor))) {
    sqlite3_stmt* raw = nullptr;
    const char* tail = nullptr;
    if (sqlite3_prepare_v2(db_, cursor, static_cast<int>(end - cursor), &raw, &tail) !=
        SQLITE_OK) {
      throw_sql(db_);
    }
    Stmt stmt(raw);
    cursor = tail;
    if (!stmt) continue;
    Table t;
    int ncols = sqlite3_column_count(raw);
    for (int i = 0; i < ncols; ++i) t.columns.emplace_back(sqlite3_column_name(raw, i));
    int nparams = sqlite3_bind_parameter_count(raw);
    for (int i = 0; i < nparams && i < static_cast<int>(params.size()); ++i) {
      bind(db_, raw, i + 1, params[static_cast<std::size_t>(i)]);
    }
    while (true) {
      int rc = sqlite3_step(raw);
      if (rc == SQLITE_DONE) break;
      if (rc != SQLITE_ROW) throw_sql(db_);
      std::vector<Value> row;
      row.reserve(static_cast<std::size_t>(ncols));
      for (int i = 0; i < ncols; ++i) row.push_back(column_value(raw, i));
      t.rows.push_back(std::move(row));
    }
    result = std::move(t);
    ran = true;
  }
  if (!ran) throw Error(ErrorCode::Sql, "empty statement");
  return result;
}

void Database::exec(std::string_view sql) const {
  std::string owned(sql);
  char* err = nullptr;
  if (sqlite3_exec(db_, owned.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : sqlite3_errmsg(db_);
    sqlite3_free(err);
    throw Error(ErrorCode::Sql, msg);
  }
}

DatabaseSchema Database::schema() const {
  DatabaseSchema schema;
  auto load = [&](std::string_view master, bool temp) {
    Table t = query("SELECT name, sql FROM " + std::string(master) +
                    " WHERE type = 'table' AND name NOT LIKE 'sqlite\\_%' ESCAPE '\\' "
                    "ORDER BY rowid");
    std::set<std::string> shadow;
    for (const auto& row : t.rows) {
      std::string sql = to_text(row[1]);
      if (to_lower(sql).find("using fts5") != std::string::npos) {
        std::string name = to_text(row[0]);
        for (const char* suffix : {"_data", "_idx", "_content", "_docsize", "_config"}) {
          shadow.insert(to_lower(name + suffix));
        }
      }
    }
    for (const auto& row : t.rows) {
      TableSchema ts;
      ts.name = to_text(row[0]);
      if (shadow.count(to_lower(ts.name))) continue;
      ts.create_sql = to_text(row[1]);
      ts.is_virtual = to_lower(ts.create_sql).rfind("create virtual table", 0) == 0;
      ts.is_temp = temp;
      Table info = query(std::string("PRAGMA ") + (temp ? "temp" : "main") + ".table_info(" +
                         quote_ident(ts.name) + ")");
      for (const auto& col : info.rows) ts.columns.push_back({to_text(col[1]), to_text(col[2])});
      schema.tables.push_back(std::move(ts));
    }
  };
  load("main.sqlite_master", false);
  load("temp.sqlite_master", true);
  return schema;
}

bool Database::documents_present() const {
  DatabaseSchema s = schema();
  const TableSchema* t = s.find(kDocumentsTable);
  return t && t->has_column("title") && t->has_column("content");
}

std::vector<std::string> Database::temp_tables() const {
  Table t = query("SELECT name FROM temp.sqlite_master WHERE type = 'table' ORDER BY name");
  std::vector<std::string> out;
  for (const auto& row : t.rows) out.push_back(to_text(row[0]));
  return out;
}

std::size_t ingest_documents(const Database& db, const std::vector<Document>& docs,
                             FtsTokenizer tokenizer) {
  if (!db.schema().find(kDocumentsTable)) {
    std::string tok = tokenizer == FtsTokenizer::Trigram ? "trigram" : "unicode61";
    try {
      db.exec("CREATE VIRTUAL TABLE \"documents\" USING fts5(title, content, tokenize = '" + tok +
              "')");
    } catch (const Error& e) {
      throw Error(ErrorCode::Storage, std::string("cannot create documents index: ") + e.what());
    }
  }
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].title.empty()) {
      throw Error(ErrorCode::Storage, "document " + std::to_string(i) + " has an empty title");
    }
  }
  try {
    db.exec("BEGIN");
    for (const auto& d : docs) {
      db.query("INSERT INTO \"documents\"(title, content) VALUES (?, ?)", {d.title, d.content});
    }
    db.exec("COMMIT");
  } catch (const Error& e) {
    try {
      db.exec("ROLLBACK");
    } catch (const Error&) {
    }
    throw Error(ErrorCode::Storage, std::string("cannot ingest documents: ") + e.what());
  }
  return docs.size();
}

Table bm25_search(const Database& db, std::string_view match_query, int k) {
  if (!db.documents_present()) throw Error(ErrorCode::Storage, "database has no documents table");
  try {
    return db.query(
        "SELECT title, content, rank FROM \"documents\" WHERE \"documents\" MATCH ? "
        "ORDER BY rank LIMIT ?",
        {std::string(match_query), static_cast<std::int64_t>(k)});
  } catch (const Error& e) {
    throw Error(ErrorCode::FtsSyntax, std::string("bad MATCH expression: ") + e.what());
  }
}

std::vector<Document> read_documents_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path + "'");
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto where = path + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Ingest, where + ": invalid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("title") || !j["title"].is_string() ||
        !j.contains("content") || !j["content"].is_string()) {
      throw Error(ErrorCode::Ingest, where + ": expected {\"title\": str, \"content\": str}");
    }
    Document d{j["title"].get<std::string>(), j["content"].get<std::string>()};
    if (d.title.empty()) throw Error(ErrorCode::Ingest, where + ": empty title");
    docs.push_back(std::move(d));
  }
  return docs;
}

SessionScope::~SessionScope() {
  for (auto it = tables_.rbegin(); it != tables_.rend(); ++it) {
    std::string sql = "DROP TABLE IF EXISTS temp." + quote_ident(it->name);
    sqlite3_exec(db_.handle(), sql.c_str(), nullptr, nullptr, nullptr);
  }
}

std::string SessionScope::fresh_name(std::string_view prefix) {
  static std::atomic<std::uint64_t> counter{0};
  return "__hql_" + std::string(prefix) + "_" + std::to_string(counter.fetch_add(1));
}

SessionTable SessionScope::materialize(std::string_view subquery, std::string_view prefix) {
  SessionTable t;
  t.name = fresh_name(prefix);
  t.origin = std::string(subquery);
  try {
    db_.exec("CREATE TEMP TABLE " + quote_ident(t.name) + " AS " + t.origin);
  } catch (const Error& e) {
    throw Error(ErrorCode::Storage, "cannot materialize session table: " + std::string(e.what()));
  }
  tables_.push_back(t);
  Table info = db_.query("PRAGMA temp.table_info(" + quote_ident(t.name) + ")");
  for (const auto& row : info.rows) t.columns.push_back(to_text(row[1]));
  Table count = db_.query("SELECT COUNT(*) FROM temp." + quote_ident(t.name));
  t.row_count = static_cast<std::size_t>(std::get<std::int64_t>(count.rows[0][0]));
  tables_.back() = t;
  return t;
}

SessionTable SessionScope::create(std::string_view prefix, const std::vector<std::string>& columns,
                                  const std::vector<std::vector<Value>>& rows) {
  SessionTable t;
  t.name = fresh_name(prefix);
  t.columns = columns;
  std::string cols;
  std::string marks;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) {
      cols += ", ";
      marks += ", ";
    }
    cols += quote_ident(columns[i]);
    marks += "?";
  }
  t.origin = "VALUES";
  try {
    db_.exec("CREATE TEMP TABLE " + quote_ident(t.name) + " (" + cols + ")");
    tables_.push_back(t);
    std::string insert = "INSERT INTO temp." + quote_ident(t.name) + " VALUES (" + marks + ")";
    for (const auto& row : rows) db_.query(insert, row);
  } catch (const Error& e) {
    throw Error(ErrorCode::Storage, "cannot create session table: " + std::string(e.what()));
  }
  t.row_count = rows.size();
  tables_.back() = t;
  return t;
}

}  // namespace hql
