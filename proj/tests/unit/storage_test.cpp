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


#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "hql/storage.hpp"
#include "support.hpp"

using namespace hql;
using namespace hql::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "hql_storage_test";
  fs::create_directories(dir);
  fs::path p = dir / name;
  fs::remove(p);
  return p;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Config;
}

std::vector<std::string> titles(const Table& t) {
  std::vector<std::string> out;
  for (const auto& row : t.rows) out.push_back(to_text(row[0]));
  return out;
}

}  // namespace

TEST_CASE("opening files") {
  SECTION("text file") {
    fs::path p = scratch("notes.txt");
    std::ofstream(p) << "this is not a database, just some text that is long enough to have a header\n";
    CHECK(code_of([&] { Database::open(p.string()); }) == ErrorCode::NotADatabase);
  }
  SECTION("missing file") {
    CHECK(code_of([&] { Database::open(scratch("absent.db").string()); }) == ErrorCode::Io);
  }
  SECTION("memory") {
    Database db = Database::open_memory();
    CHECK(db.schema().tables.empty());
    CHECK_FALSE(db.documents_present());
  }
  SECTION("fixture layout") {
    Database db = fixture_db("mariners");
    auto s = db.schema();
    REQUIRE(s.find("w"));
    REQUIRE(s.find("documents"));
    CHECK(s.find("documents")->is_virtual);
    CHECK(s.find("W")->has_column("SCHOOL"));
    CHECK(db.documents_present());
  }
}

TEST_CASE("document ingest") {
  Database db = Database::open_memory();
  SECTION("three documents") {
    auto docs = read_documents_jsonl(data_path("fixtures/mariners/documents.jsonl"));
    CHECK(ingest_documents(db, docs) == 3);
    CHECK(to_text(db.query("SELECT COUNT(*) FROM documents").rows[0][0]) == "3");
  }
  SECTION("nothing to ingest") {
    CHECK(ingest_documents(db, {}) == 0);
    CHECK(db.documents_present());
  }
  SECTION("duplicate titles") {
    CHECK(ingest_documents(db, {{"lake", "a deep lake"}, {"lake", "a shallow lake"}}) == 2);
    CHECK(bm25_search(db, "lake", 10).row_count() == 2);
  }
  SECTION("empty title") {
    CHECK_THROWS_AS(ingest_documents(db, {{"", "body"}}), Error);
  }
}

TEST_CASE("bm25 search") {
  Database db = fixture_db("nba");

  SECTION("order and scores follow the formula") {
    // Reference scores from a direct implementation of the ranking formula
    // (k1 1.2, b 0.75, trigram tokens, both columns) over this fixture.
    Table t = bm25_search(db, "nba OR covid", 10);
    REQUIRE(titles(t) == std::vector<std::string>{"2019-20 nba season", "nba bubble"});
    CHECK(std::get<double>(t.rows[0][2]) == Catch::Approx(-0.7716509395045149).epsilon(1e-9));
    CHECK(std::get<double>(t.rows[1][2]) == Catch::Approx(-1.5189401007650683e-06).epsilon(1e-6));
  }
  SECTION("k limits the rows") {
    CHECK(bm25_search(db, "nba OR covid", 1).row_count() == 1);
  }
  SECTION("no match") {
    CHECK(bm25_search(db, "zzqqxx", 5).empty());
  }
  SECTION("malformed query") {
    CHECK(code_of([&] { bm25_search(db, "\"unbalanced", 5); }) == ErrorCode::FtsSyntax);
  }
  SECTION("birth date phrase") {
    Database d = Database::open_memory();
    ingest_documents(d, {{"cyril tooheys", "cyril tooheys (born 5 september 1892) was an australian athlete."},
                         {"sydney", "sydney is a city in new south wales."},
                         {"1892 in sport", "events in sport during 1892, september."}});
    Table t = bm25_search(d, "born 5 september 1892", 3);
    REQUIRE_FALSE(t.empty());
    CHECK(to_text(t.rows[0][0]) == "cyril tooheys");
  }
  SECTION("no documents table") {
    Database d = Database::open_memory();
    CHECK(code_of([&] { bm25_search(d, "x", 1); }) == ErrorCode::Storage);
  }
}

TEST_CASE("native SQL") {
  Database db = fixture_db("mariners");
  CHECK(std::get<std::int64_t>(db.execute_native("SELECT COUNT(*) FROM w").rows[0][0]) == 3);
  Table one = db.execute_native("SELECT 1");
  CHECK(one.rows == std::vector<std::vector<Value>>{{std::int64_t{1}}});
  CHECK(code_of([&] { db.query("SELEC 1"); }) == ErrorCode::Sql);
}

TEST_CASE("session tables stay on their connection") {
  fs::path p = scratch("shared.db");
  {
    Database init = Database::create(p.string());
    init.exec("CREATE TABLE t (x INTEGER); INSERT INTO t VALUES (1), (2)");
  }
  Database a = Database::open(p.string());
  Database b = Database::open(p.string());
  {
    SessionScope scope(a);
    SessionTable st = scope.materialize("SELECT x FROM t");
    CHECK(st.row_count == 2);
    CHECK(a.temp_tables().size() == 1);
    CHECK(b.temp_tables().empty());
    CHECK_THROWS(b.query("SELECT * FROM " + quote_ident(st.name)));
  }
  CHECK(a.temp_tables().empty());
}

TEST_CASE("csv parsing") {
  SECTION("quoted fields") {
    CsvData d = parse_csv("name,note\n\"fields, joshua\",\"said \"\"hi\"\"\"\nraben,\n");
    REQUIRE(d.rows.size() == 2);
    CHECK(d.rows[0][0] == "fields, joshua");
    CHECK(d.rows[0][1] == "said \"hi\"");
    CHECK(d.rows[1][1].empty());
  }
  SECTION("ragged row names its line") {
    try {
      parse_csv("a,b\n1,2\n3\n");
      FAIL("expected an ingest error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Ingest);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SECTION("types and index column") {
    Database db = Database::open_memory();
    ingest_table(db, "w", parse_csv("year,gp,ppg\n2019-20,67,25.3\n2020-21,45,25.0\n"));
    Table t = db.query("SELECT \"index\", year, gp, ppg FROM w ORDER BY \"index\"");
    CHECK(t.rows[0][0] == Value{std::int64_t{0}});
    CHECK(t.rows[0][1] == Value{std::string("2019-20")});
    CHECK(t.rows[0][2] == Value{std::int64_t{67}});
    CHECK(t.rows[1][3] == Value{25.0});
  }
}
