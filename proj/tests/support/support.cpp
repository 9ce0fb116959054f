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


#include "support.hpp"

#include <fstream>
#include <sstream>

#include "hql/value.hpp"

#ifndef HQL_DATA_DIR
#define HQL_DATA_DIR "data"
#endif

namespace hql::testing {

std::string data_dir() { return HQL_DATA_DIR; }

std::string data_path(const std::string& rel) { return data_dir() + "/" + rel; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(read_file(path)); }

std::vector<CorpusEntry> read_corpus(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<CorpusEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("-- name:", 0) == 0) {
      out.push_back({trim(line.substr(8)), "", {}});
    } else if (out.empty()) {
      continue;
    } else if (line.rfind("-- kinds:", 0) == 0 && out.back().query.empty()) {
      std::stringstream kinds(line.substr(9));
      for (std::string k; std::getline(kinds, k, ',');) {
        if (!trim(k).empty()) out.back().kinds.push_back(trim(k));
      }
    } else {
      out.back().query += line + "\n";
    }
  }
  for (auto& e : out) e.query = trim(e.query);
  return out;
}

std::string squash_ws(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

Database fixture_db(const std::string& name) {
  Database db = Database::open_memory();
  std::string dir = data_path("fixtures/" + name);
  ingest_table(db, "w", read_csv(dir + "/w.csv"));
  ingest_documents(db, read_documents_jsonl(dir + "/documents.jsonl"));
  return db;
}

std::string fixture_query(const std::string& name) {
  return trim(read_file(data_path("fixtures/" + name + "/query.hql")));
}

std::shared_ptr<LookupBlender> fixture_blender(const std::string& name) {
  return LookupBlender::from_file(data_path("fixtures/" + name + "/blender.json"), true);
}

void make_events(const Database& db, int rows, int rare_every) {
  static const char* kSports[] = {"100m sprint", "4x100 medley relay", "team pursuit", "high jump",
                                  "doubles final", "marathon", "team event", "single sculls"};
  db.exec("CREATE TABLE events (id INTEGER, category TEXT, description TEXT)");
  db.exec("BEGIN");
  for (int i = 0; i < rows; ++i) {
    std::string category = i % rare_every == 0 ? "rare" : "common" + std::to_string(i % 7);
    std::string desc = "event " + std::to_string(i) + ": " + kSports[i % 8];
    db.query("INSERT INTO events VALUES (?, ?, ?)",
             {Value{std::int64_t{i}}, Value{category}, Value{desc}});
  }
  db.exec("COMMIT");
}

std::shared_ptr<FunctionBlender> constant_blender(std::string answer) {
  return std::make_shared<FunctionBlender>(
      [answer](const BlenderRequest& req) -> std::string {
        if (!req.task) return answer;
        const TaskPayload& t = *req.task;
        std::string out;
        if (t.kind == "join") {
          for (std::size_t i = 0; i < t.items.size(); ++i) out += t.none_token + ";";
          return out;
        }
        if (t.kind == "qa") return t.options.empty() ? answer : t.options.front();
        if (t.kind == "validate") return "true;";
        for (std::size_t i = 0; i < t.items.size(); ++i) out += answer + ";";
        return out;
      },
      "constant");
}

// ---- CaseGenerator ----

namespace {

const std::vector<std::string> kColors = {"red", "green", "blue", "gray", "teal"};
const std::vector<std::string> kReals = {"0.5", "1.5", "2.5", "3.5"};

nlohmann::json lookup_fixture(const std::string& qa_answer) {
  nlohmann::json warm = nlohmann::json::object();
  for (const auto& c : kColors) {
    warm[c] = c == "red" || c == "gray";
  }
  nlohmann::json upper = nlohmann::json::object();
  nlohmann::json join = nlohmann::json::object();
  for (const auto& c : kColors) {
    std::string u;
    for (char ch : c) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
    upper[u] = c == "red" || c == "gray";
    join[c] = u;
  }
  nlohmann::json score = nlohmann::json::object();
  for (int a = 0; a <= 4; ++a) score[std::to_string(a)] = std::to_string(10 + a);
  nlohmann::json large = nlohmann::json::object();
  for (const auto& r : kReals) large[r] = std::stod(r) > 2.0;
  return {{"map",
           {{"Is this color warm?", warm},
            {"Is this code warm?", upper},
            {"Score this number", score},
            {"Is this value large?", large}}},
          {"qa", {{"Which color is most common?", qa_answer}}},
          {"validate", {{"Is there a warm color?", true}}},
          {"join", {{"*", join}}}};
}

}  // namespace

int CaseGenerator::uniform(int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng_);
}

std::string CaseGenerator::predicate(const std::string& q) {
  const std::string color = kColors[uniform(0, 4)];
  switch (uniform(0, 9)) {
    case 0: return q + ".a = " + std::to_string(uniform(0, 4));
    case 1: return q + ".a > " + std::to_string(uniform(0, 3));
    case 2: return q + ".a <= " + std::to_string(uniform(0, 4));
    case 3: return q + ".b = '" + color + "'";
    case 4: return q + ".b <> '" + color + "'";
    case 5: return q + ".c < " + kReals[uniform(0, 3)];
    case 6: return q + ".id % 2 = " + std::to_string(uniform(0, 1));
    case 7: return q + ".b LIKE '" + color.substr(0, 1) + "%'";
    case 8: return q + ".a BETWEEN 1 AND 3";
    default: return q + ".b IN ('" + color + "', '" + kColors[uniform(0, 4)] + "')";
  }
}

std::string CaseGenerator::conjunction(const std::string& q, int max_atoms) {
  int n = uniform(0, max_atoms);
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i) out += " AND ";
    std::string p = predicate(q);
    out += uniform(0, 4) == 0 ? "(" + p + ")" : p;
  }
  return out;
}

RandomCase CaseGenerator::next() {
  RandomCase rc;
  int rows = uniform(1, 20);
  std::string sql = "CREATE TABLE t (id INTEGER, a INTEGER, b TEXT, c REAL);\n";
  for (int i = 0; i < rows; ++i) {
    std::string a = uniform(0, 9) == 0 ? "NULL" : std::to_string(uniform(0, 4));
    std::string c = uniform(0, 9) == 0 ? "NULL" : kReals[uniform(0, 3)];
    sql += "INSERT INTO t VALUES (" + std::to_string(i) + ", " + a + ", '" + kColors[uniform(0, 4)] +
           "', " + c + ");\n";
  }
  int urows = uniform(1, 8);
  sql += "CREATE TABLE u (id INTEGER, k TEXT);\n";
  for (int i = 0; i < urows; ++i) {
    std::string u;
    for (char ch : kColors[uniform(0, 4)]) u.push_back(static_cast<char>(std::toupper(ch)));
    sql += "INSERT INTO u VALUES (" + std::to_string(uniform(0, 19)) + ", '" + u + "');\n";
  }
  rc.setup_sql = sql;
  rc.lookup = lookup_fixture(kColors[uniform(0, 4)]);

  auto where = [](const std::string& p, const std::string& ingredient, bool first) {
    if (p.empty()) return " WHERE " + ingredient;
    return first ? " WHERE " + ingredient + " AND " + p : " WHERE " + p + " AND " + ingredient;
  };
  bool first = uniform(0, 1) == 0;
  const std::string warm = "{{LLMMap('Is this color warm?', 't::b')}} = TRUE";
  switch (uniform(0, 8)) {
    case 0:
      rc.query = "SELECT id, a, b FROM t" + where(conjunction("t", 3), warm, first) + " ORDER BY id";
      break;
    case 1: {
      std::string p = conjunction("t", 3);
      rc.query = "SELECT id, {{LLMMap('Score this number', 't::a')}} AS s FROM t" +
                 (p.empty() ? "" : " WHERE " + p) + " ORDER BY id";
      break;
    }
    case 2:
      rc.query = "SELECT x.id FROM t AS x" +
                 where(conjunction("x", 3), "{{LLMMap('Is this value large?', 'x::c')}} = FALSE", first) +
                 " ORDER BY x.id";
      break;
    case 3: {
      std::string inner = conjunction("t", 2);
      rc.query = "SELECT COUNT(*) FROM t" +
                 where(conjunction("t", 2),
                       "b = {{LLMQA('Which color is most common?', (SELECT b FROM t" +
                           (inner.empty() ? "" : " WHERE " + inner) + "), options='t::b')}}",
                       first);
      break;
    }
    case 4: {
      std::string inner = conjunction("t", 2);
      rc.query = "SELECT id FROM t" +
                 where(conjunction("t", 3),
                       "{{LLMValidate('Is there a warm color?', (SELECT b FROM t" +
                           (inner.empty() ? "" : " WHERE " + inner) + "))}}",
                       first) +
                 " ORDER BY id";
      break;
    }
    case 5: {
      std::string p = conjunction("t", 2);
      if (uniform(0, 1)) p += std::string(p.empty() ? "" : " AND ") + "u.id > " + std::to_string(uniform(0, 10));
      rc.query = "SELECT t.id, u.id FROM t JOIN {{LLMJoin(left_on='t::b', right_on='u::k')}}" +
                 (p.empty() ? "" : " WHERE " + p) + " ORDER BY t.id, u.id";
      break;
    }
    case 6:
      rc.query = "SELECT t.id, u.id FROM t, u" +
                 where("t.id = u.id" + std::string(uniform(0, 1) ? " AND " + predicate("t") : ""),
                       "{{LLMMap('Is this code warm?', 'u::k')}} = TRUE", first) +
                 " ORDER BY t.id, u.id";
      break;
    case 7:
      rc.query = "SELECT b, COUNT(*) FROM t WHERE (" + predicate("t") + " OR " + predicate("t") +
                 ") AND " + warm + " GROUP BY b ORDER BY b";
      break;
    default: {
      std::string inner = conjunction("t", 2);
      std::string outer = conjunction("t", 2);
      rc.query = "SELECT id FROM t WHERE " + (outer.empty() ? "" : outer + " AND ") +
                 "a IN (SELECT a FROM t" + where(inner, warm, first) + ") ORDER BY id";
      break;
    }
  }
  return rc;
}

}  // namespace hql::testing
