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

#include "hql/value.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace hql {

namespace {

std::string format_real(double d) {
  if (std::isnan(d)) return "NULL";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", d);
  // Prefer the shortest representation that round-trips.
  for (int precision = 1; precision <= 17; ++precision) {
    char shortest[64];
    std::snprintf(shortest, sizeof(shortest), "%.*g", precision, d);
    if (std::strtod(shortest, nullptr) == d) return shortest;
  }
  return buf;
}

std::string hex(std::string_view bytes) {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(kDigits[c >> 4]);
    out.push_back(kDigits[c & 0xF]);
  }
  return out;
}

}  // namespace

std::string to_text(const Value& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const { return format_real(d); }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(const Blob& b) const { return b.bytes; }
  };
  return std::visit(Visitor{}, v);
}

std::string quote_string(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  out.push_back('\'');
  for (char c : s) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

std::string quote_ident(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string sql_literal(const Value& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return "NULL"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      std::string s = format_real(d);
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      return s;
    }
    std::string operator()(const std::string& s) const { return quote_string(s); }
    std::string operator()(const Blob& b) const { return "X'" + hex(b.bytes) + "'"; }
  };
  return std::visit(Visitor{}, v);
}

Value coerce_scalar(std::string_view text) {
  std::string_view t = text;
  if (t.empty() || std::isspace(static_cast<unsigned char>(t.front())) ||
      std::isspace(static_cast<unsigned char>(t.back()))) {
    return std::string(text);
  }
  std::int64_t i = 0;
  auto [iend, iec] = std::from_chars(t.data(), t.data() + t.size(), i);
  if (iec == std::errc() && iend == t.data() + t.size()) {
    // Keep leading zeros ("007") and explicit plus signs as text.
    bool canonical = std::to_string(i) == t;
    if (canonical) return i;
    return std::string(text);
  }
  double d = 0;
  auto [dend, dec] = std::from_chars(t.data(), t.data() + t.size(), d);
  if (dec == std::errc() && dend == t.data() + t.size() && std::isfinite(d)) {
    return d;
  }
  return std::string(text);
}

nlohmann::json to_json(const Value& v) {
  struct Visitor {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(std::int64_t i) const { return i; }
    nlohmann::json operator()(double d) const { return d; }
    nlohmann::json operator()(const std::string& s) const { return s; }
    nlohmann::json operator()(const Blob& b) const {
      return nlohmann::json{{"blob", hex(b.bytes)}};
    }
  };
  return std::visit(Visitor{}, v);
}

nlohmann::json to_json(const Table& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& cell : row) r.push_back(to_json(cell));
    rows.push_back(std::move(r));
  }
  return nlohmann::json{{"columns", t.columns}, {"rows", std::move(rows)}};
}

std::string render_pipe_table(const Table& t, std::size_t cell_cap) {
  auto cell = [cell_cap](std::string s) {
    for (char& c : s) {
      if (c == '\n' || c == '\r' || c == '\t') c = ' ';
    }
    if (cell_cap > 0 && s.size() > cell_cap) s.resize(cell_cap);
    return s;
  };
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += " | ";
    out += cell(t.columns[i]);
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += " | ";
      out += cell(to_text(row[i]));
    }
    out += '\n';
  }
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

}  // namespace hql
