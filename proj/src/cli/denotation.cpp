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

#include <array>
#include <cctype>
#include <set>
#include <sstream>

#include "hql/cli.hpp"

namespace hql::cli {

namespace {

constexpr std::array<std::string_view, 21> kNumberWords = {
    "zero",    "one",     "two",       "three",    "four",     "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty"};

int scale_zeros(std::string_view w) {
  if (w == "thousand" || w == "thousands") return 3;
  if (w == "million" || w == "millions") return 6;
  if (w == "billion" || w == "billions") return 9;
  if (w == "trillion" || w == "trillions") return 12;
  return -1;
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

bool is_number(std::string_view t) {
  if (t.empty()) return false;
  std::size_t i = t[0] == '-' ? 1 : 0;
  bool digits = false;
  bool dot = false;
  for (; i < t.size(); ++i) {
    if (is_digit(t[i])) {
      digits = true;
    } else if (t[i] == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digits;
}

// "7.50" -> "7.5", "7.0" -> "7", "007" -> "7".
std::string canonical_number(std::string t) {
  bool neg = !t.empty() && t[0] == '-';
  if (neg) t.erase(0, 1);
  if (auto dot = t.find('.'); dot != std::string::npos) {
    while (!t.empty() && t.back() == '0') t.pop_back();
    if (!t.empty() && t.back() == '.') t.pop_back();
  }
  std::size_t lead = 0;
  while (lead + 1 < t.size() && t[lead] == '0' && t[lead + 1] != '.') ++lead;
  t.erase(0, lead);
  if (t.empty()) t = "0";
  return (neg && t != "0") ? "-" + t : t;
}

// Multiplies a decimal string by 10^zeros without floating point.
std::string shift_decimal(const std::string& num, int zeros) {
  std::string t = num;
  bool neg = !t.empty() && t[0] == '-';
  if (neg) t.erase(0, 1);
  std::string intpart = t;
  std::string frac;
  if (auto dot = t.find('.'); dot != std::string::npos) {
    intpart = t.substr(0, dot);
    frac = t.substr(dot + 1);
  }
  std::string digits = intpart + frac;
  int point = static_cast<int>(intpart.size()) + zeros;
  if (point >= static_cast<int>(digits.size())) {
    digits.append(static_cast<std::size_t>(point) - digits.size(), '0');
  } else {
    digits.insert(static_cast<std::size_t>(point), ".");
  }
  return canonical_number((neg ? "-" : "") + digits);
}

std::string strip_symbols(std::string_view in) {
  // Currency signs: $ and the UTF-8 forms of euro, pound, yen.
  std::string s;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] == '$') continue;
    if (in.substr(i, 3) == "\xE2\x82\xAC") {
      i += 2;
      continue;
    }
    if (in.substr(i, 2) == "\xC2\xA3" || in.substr(i, 2) == "\xC2\xA5") {
      i += 1;
      continue;
    }
    s.push_back(in[i]);
  }
  // Thousands separators: a comma between a digit and exactly three digits.
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == ',' && i > 0 && is_digit(s[i - 1]) && i + 3 < s.size() && is_digit(s[i + 1]) &&
        is_digit(s[i + 2]) && is_digit(s[i + 3]) && (i + 4 >= s.size() || !is_digit(s[i + 4]))) {
      continue;
    }
    out.push_back(s[i]);
  }
  return out;
}

}  // namespace

std::string normalize_denotation(std::string_view value) {
  std::string s = to_lower(strip_symbols(value));
  // Punctuation becomes a space, except decimal points and inner hyphens.
  std::string cleaned;
  for (std::size_t i = 0; i < s.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    bool prev_alnum = i > 0 && (std::isalnum(static_cast<unsigned char>(s[i - 1])) || s[i - 1] & 0x80);
    bool next_alnum = i + 1 < s.size() && (std::isalnum(static_cast<unsigned char>(s[i + 1])) || s[i + 1] & 0x80);
    if (std::isalnum(c) || c >= 0x80) {
      cleaned.push_back(static_cast<char>(c));
    } else if (c == '.' && i > 0 && is_digit(s[i - 1]) && i + 1 < s.size() && is_digit(s[i + 1])) {
      cleaned.push_back('.');
    } else if (c == '-' && prev_alnum && next_alnum) {
      cleaned.push_back('-');
    } else if (c == '-' && !prev_alnum && i + 1 < s.size() && is_digit(s[i + 1])) {
      cleaned.push_back('-');
    } else {
      cleaned.push_back(' ');
    }
  }

  std::vector<std::string> tokens;
  std::istringstream in(cleaned);
  for (std::string t; in >> t;) {
    if (t == "a" || t == "an" || t == "the") continue;
    for (std::size_t n = 0; n < kNumberWords.size(); ++n) {
      if (t == kNumberWords[n]) t = std::to_string(n);
    }
    tokens.push_back(t);
  }

  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (is_number(tokens[i])) {
      if (i + 1 < tokens.size()) {
        int zeros = scale_zeros(tokens[i + 1]);
        if (zeros > 0) {
          out.push_back(shift_decimal(tokens[i], zeros));
          ++i;
          continue;
        }
      }
      out.push_back(canonical_number(tokens[i]));
    } else {
      out.push_back(tokens[i]);
    }
  }
  std::string joined;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i) joined += ' ';
    joined += out[i];
  }
  return joined;
}

bool denotation_match(const std::vector<std::string>& predicted, const std::vector<std::string>& gold) {
  std::set<std::string> p;
  std::set<std::string> g;
  for (const auto& v : predicted) p.insert(normalize_denotation(v));
  for (const auto& v : gold) g.insert(normalize_denotation(v));
  return !g.empty() && p == g;
}

}  // namespace hql::cli
