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

#include "hql/context_prep.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hql {

namespace {

std::size_t display_width(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::string pad_left(const std::string& s, std::size_t width) {
  std::size_t w = display_width(s);
  return w >= width ? s : std::string(width - w, ' ') + s;
}

bool skip_table(const TableSchema& t) {
  return t.is_temp || t.name.rfind("__hql_", 0) == 0 || t.name.rfind("sqlite_", 0) == 0;
}

bool simple_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

std::string format_rows(const Table& t) {
  enum class Kind { Text, Int, Float };
  const std::size_t ncol = t.columns.size();
  std::vector<std::vector<std::string>> cells(t.rows.size(), std::vector<std::string>(ncol));
  std::string out;
  std::vector<std::string> header(ncol);
  std::vector<std::size_t> width(ncol);
  for (std::size_t c = 0; c < ncol; ++c) {
    bool any = false;
    bool nulls = false;
    bool reals = false;
    bool numbers = true;
    for (const auto& row : t.rows) {
      const Value& v = row[c];
      if (is_null(v)) {
        nulls = true;
        continue;
      }
      any = true;
      if (std::holds_alternative<double>(v)) {
        reals = true;
      } else if (!std::holds_alternative<std::int64_t>(v)) {
        numbers = false;
      }
    }
    Kind kind = !any || !numbers ? Kind::Text : (reals || nulls) ? Kind::Float : Kind::Int;

    // Floats share one count of decimals per column, at least 1 and at most 6.
    int decimals = 1;
    if (kind == Kind::Float) {
      for (const auto& row : t.rows) {
        if (!std::holds_alternative<double>(row[c])) continue;
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof buf, std::get<double>(row[c]), std::chars_format::fixed);
        std::string_view text(buf, static_cast<std::size_t>(res.ptr - buf));
        auto dot = text.find('.');
        if (dot != std::string_view::npos) decimals = std::max(decimals, static_cast<int>(text.size() - dot - 1));
      }
      decimals = std::min(decimals, 6);
    }

    header[c] = kind == Kind::Text ? t.columns[c] : " " + t.columns[c];
    width[c] = display_width(header[c]);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const Value& v = t.rows[r][c];
      std::string& cell = cells[r][c];
      if (is_null(v)) {
        cell = kind == Kind::Float ? "NaN" : "None";
      } else if (kind == Kind::Float) {
        double d = std::holds_alternative<double>(v) ? std::get<double>(v)
                                                      : static_cast<double>(std::get<std::int64_t>(v));
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*f", decimals, d);
        cell = buf;
      } else {
        cell = to_text(v);
      }
      width[c] = std::max(width[c], display_width(cell));
    }
  }
  for (std::size_t c = 0; c < ncol; ++c) {
    if (c) out += ' ';
    out += pad_left(header[c], width[c]);
  }
  for (const auto& row : cells) {
    out += '\n';
    for (std::size_t c = 0; c < ncol; ++c) {
      if (c) out += ' ';
      out += pad_left(row[c], width[c]);
    }
  }
  return out;
}

std::string SerializedSchema::render(int rows) const {
  std::string out;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const SchemaEntry& e = tables[i];
    if (i) out += "\n\n";
    out += e.create_sql;
    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(rows, 0)), e.sample.rows.size());
    if (!e.rows_allowed || k == 0) continue;
    Table shown{e.sample.columns, {e.sample.rows.begin(), e.sample.rows.begin() + static_cast<long>(k)}};
    std::string name = simple_identifier(e.name) ? e.name : quote_ident(e.name);
    out += "\n/*\n" + std::to_string(k) + " example rows:\nSELECT * FROM " + name + " LIMIT " +
           std::to_string(k) + "\n" + format_rows(shown) + "\n*/";
  }
  return out;
}

SerializedSchema serialize_schema(const Database& db, int n) {
  SerializedSchema out;
  out.n_rows = std::max(n, 0);
  DatabaseSchema schema = db.schema();
  std::vector<const TableSchema*> order;
  for (const auto& t : schema.tables) {
    if (!skip_table(t) && !t.is_virtual) order.push_back(&t);
  }
  for (const auto& t : schema.tables) {
    if (!skip_table(t) && t.is_virtual) order.push_back(&t);
  }
  for (const TableSchema* t : order) {
    SchemaEntry e;
    e.name = t->name;
    e.create_sql = t->create_sql;
    e.rows_allowed = !t->is_virtual;
    if (e.rows_allowed && out.n_rows > 0) {
      e.sample = db.query("SELECT * FROM " + quote_ident(t->name) + " LIMIT " + std::to_string(out.n_rows));
    }
    out.tables.push_back(std::move(e));
  }
  out.text = out.render(out.n_rows);
  return out;
}

std::vector<BridgeHint> bridge_match(std::string_view question, const Database& db,
                                     const BridgeOptions& options) {
  if (trim(question).empty()) return {};
  std::vector<BridgeCell> cells;
  for (const auto& t : db.schema().tables) {
    if (skip_table(t) || t.is_virtual) continue;
    for (const auto& col : t.columns) {
      Table vals = db.query("SELECT DISTINCT " + quote_ident(col.name) + " FROM " + quote_ident(t.name) +
                            " WHERE typeof(" + quote_ident(col.name) + ") = 'text' AND length(" +
                            quote_ident(col.name) + ") <= ?",
                            {Value{static_cast<std::int64_t>(options.max_cell_chars)}});
      for (const auto& row : vals.rows) cells.push_back({t.name, col.name, to_text(row[0])});
    }
  }
  TrigramDice dice;
  const StringSimilarity& sim = options.similarity ? *options.similarity : dice;
  auto hints = score_cells(question, cells, sim, options.threshold, options.parallel);
  if (hints.size() > options.max_hints) hints.resize(options.max_hints);
  return hints;
}

std::vector<FewShot> read_few_shots(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, path + ": " + e.what());
  }
  if (!j.is_array()) throw Error(ErrorCode::Config, path + ": expected a JSON array");
  std::vector<FewShot> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& item = j[i];
    if (!item.is_object() || !item.contains("question") || !item.contains("blendsql")) {
      throw Error(ErrorCode::Config, path + ": entry " + std::to_string(i) + " needs question and blendsql");
    }
    FewShot fs;
    fs.question = item["question"].get<std::string>();
    fs.blendsql = item["blendsql"].get<std::string>();
    if (item.contains("serialized_db")) fs.serialized_db = item["serialized_db"].get<std::string>();
    out.push_back(std::move(fs));
  }
  return out;
}

PromptTemplate PromptTemplate::from_dir(const std::string& dir) {
  PromptTemplate t;
  t.system = strip_trailing_newlines(read_file(dir + "/parser_system.txt"));
  t.user = strip_trailing_newlines(read_file(dir + "/parser_user.txt"));
  return t;
}

std::string render_template(std::string_view tpl, const std::map<std::string, std::string>& slots) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = tpl.find("{{", pos);
    if (open == std::string_view::npos) break;
    std::size_t close = tpl.find("}}", open + 2);
    if (close == std::string_view::npos) throw Error(ErrorCode::Config, "unclosed template slot");
    out.append(tpl.substr(pos, open - pos));
    std::string name = trim(tpl.substr(open + 2, close - open - 2));
    auto it = slots.find(name);
    if (it == slots.end()) throw Error(ErrorCode::Config, "unknown template slot: " + name);
    out += it->second;
    pos = close + 2;
  }
  out.append(tpl.substr(pos));
  return out;
}

std::string format_hints(const std::vector<BridgeHint>& hints) {
  if (hints.empty()) return {};
  std::string out = "-- matched values:";
  char score[16];
  for (const auto& h : hints) {
    std::snprintf(score, sizeof score, "%.2f", h.score);
    out += "\n-- " + h.table + "." + h.column + " = " + quote_string(h.matched_value) + " (question: \"" +
           h.question_span + "\", score " + score + ")";
  }
  return out;
}

ParserPrompt build_parser_prompt(const PromptTemplate& tpl, const std::vector<FewShot>& few_shots,
                                 const SerializedSchema& schema, std::string_view question,
                                 const std::vector<BridgeHint>& hints, const PromptBudget& budget) {
  const std::string hint_text = format_hints(hints);
  auto build = [&](int rows, std::size_t shots) {
    std::string examples;
    for (std::size_t i = 0; i < shots; ++i) {
      const FewShot& fs = few_shots[i];
      if (i) examples += "\n\n";
      if (!fs.serialized_db.empty()) examples += fs.serialized_db + "\n";
      examples += "Question: " + fs.question + "\nBlendSQL:\n" + fs.blendsql;
    }
    std::string db = schema.render(rows);
    if (!hint_text.empty()) db += "\n\n" + hint_text;
    ParserPrompt p;
    p.system = render_template(tpl.system, {});
    p.user = render_template(
        tpl.user, {{"few_shot_examples", examples}, {"serialized_db", db}, {"question", std::string(question)}});
    return p;
  };

  int rows = schema.n_rows;
  std::size_t shots = few_shots.size();
  ParserPrompt p = build(rows, shots);
  while (budget.max_chars > 0 && p.chars() > budget.max_chars) {
    if (rows > 0) {
      --rows;
    } else if (shots > 0) {
      --shots;
    } else {
      throw Error(ErrorCode::PromptTooLarge, "parser prompt needs " + std::to_string(p.chars()) +
                                                 " characters; budget is " + std::to_string(budget.max_chars));
    }
    p = build(rows, shots);
  }
  if (rows < schema.n_rows) {
    p.notes.push_back("example rows per table reduced from " + std::to_string(schema.n_rows) + " to " +
                      std::to_string(rows));
  }
  if (shots < few_shots.size()) {
    p.notes.push_back("few-shot examples reduced from " + std::to_string(few_shots.size()) + " to " +
                      std::to_string(shots));
  }
  return p;
}

std::string extract_query(std::string_view response) {
  std::string s = trim(response);
  if (s.rfind("```", 0) == 0) {
    auto nl = s.find('\n');
    s = nl == std::string::npos ? "" : s.substr(nl + 1);
    auto fence = s.rfind("```");
    if (fence != std::string::npos) s = s.substr(0, fence);
    s = trim(s);
  }
  if (s.rfind("BlendSQL:", 0) == 0) s = trim(std::string_view(s).substr(9));
  return s;
}

}  // namespace hql
