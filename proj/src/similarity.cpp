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

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>

#include "hql/context_prep.hpp"

namespace hql {

namespace {

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::size_t shared_count(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  // Both sorted.
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

struct QuestionSpan {
  std::size_t words;
  std::string text;
};

std::optional<BridgeHint> score_one(const std::vector<QuestionSpan>& spans, const BridgeCell& cell,
                                    const StringSimilarity& sim, double threshold) {
  std::string norm = normalize_span(cell.value);
  if (norm.empty()) return std::nullopt;
  std::size_t k = split_words(norm).size();
  std::size_t lo = k > 1 ? k - 1 : 1;
  std::size_t hi = k + 1;
  std::optional<BridgeHint> best;
  for (const QuestionSpan& s : spans) {
    if (s.words < lo || s.words > hi) continue;
    double score = sim.score(s.text, norm);
    if (score >= threshold && (!best || score > best->score)) {
      best = BridgeHint{s.text, cell.table, cell.column, cell.value, score};
    }
  }
  return best;
}

}  // namespace

std::string normalize_span(std::string_view text) {
  std::string out;
  bool space = true;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      out.push_back(static_cast<char>(std::tolower(c)));
      space = false;
    } else if (!space) {
      out.push_back(' ');
      space = true;
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<std::string> char_trigrams(std::string_view normalized) {
  std::string padded = " " + std::string(normalized) + " ";
  std::vector<std::string> out;
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) out.push_back(padded.substr(i, 3));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double TrigramDice::score(std::string_view a, std::string_view b) const {
  auto ta = char_trigrams(a);
  auto tb = char_trigrams(b);
  if (ta.empty() && tb.empty()) return 1.0;
  return 2.0 * static_cast<double>(shared_count(ta, tb)) / static_cast<double>(ta.size() + tb.size());
}

double TrigramJaccard::score(std::string_view a, std::string_view b) const {
  auto ta = char_trigrams(a);
  auto tb = char_trigrams(b);
  if (ta.empty() && tb.empty()) return 1.0;
  std::size_t shared = shared_count(ta, tb);
  return static_cast<double>(shared) / static_cast<double>(ta.size() + tb.size() - shared);
}

std::vector<BridgeHint> score_cells(std::string_view question, const std::vector<BridgeCell>& cells,
                                    const StringSimilarity& similarity, double threshold,
                                    bool parallel) {
  auto words = split_words(normalize_span(question));
  std::vector<QuestionSpan> spans;
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::string text;
    for (std::size_t j = i; j < words.size() && j - i < 12; ++j) {
      if (j > i) text += ' ';
      text += words[j];
      spans.push_back({j - i + 1, text});
    }
  }

  std::vector<std::optional<BridgeHint>> scored(cells.size());
  const auto n = static_cast<std::int64_t>(cells.size());
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) scored[i] = score_one(spans, cells[i], similarity, threshold);
  } else {
    for (std::int64_t i = 0; i < n; ++i) scored[i] = score_one(spans, cells[i], similarity, threshold);
  }

  std::vector<BridgeHint> out;
  for (auto& h : scored) {
    if (h) out.push_back(std::move(*h));
  }
  std::stable_sort(out.begin(), out.end(), [](const BridgeHint& a, const BridgeHint& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.table, a.column, a.matched_value) < std::tie(b.table, b.column, b.matched_value);
  });
  return out;
}

}  // namespace hql
