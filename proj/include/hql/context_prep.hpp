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

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hql/blender.hpp"
#include "hql/storage.hpp"
#include "hql/value.hpp"

namespace hql {

struct SchemaEntry {
  std::string name;
  std::string create_sql;
  bool rows_allowed = true;  // false for full-text tables
  Table sample;              // up to n rows
};

struct SerializedSchema {
  std::vector<SchemaEntry> tables;
  int n_rows = 0;
  std::string text;

  /// Text with at most `rows` example rows per table.
  std::string render(int rows) const;
};

/// CREATE statements plus `n` example rows of each table except full-text
/// tables. Session tables are skipped.
SerializedSchema serialize_schema(const Database& db, int n);

/// Right-aligned text grid in the layout of pandas' DataFrame.to_string.
std::string format_rows(const Table& t);

/// Lower-case, punctuation to spaces, whitespace collapsed.
std::string normalize_span(std::string_view text);

/// Distinct character trigrams of " " + normalized + " ".
std::vector<std::string> char_trigrams(std::string_view normalized);

class StringSimilarity {
 public:
  virtual ~StringSimilarity() = default;
  /// Score in [0, 1] between two normalized strings.
  virtual double score(std::string_view a, std::string_view b) const = 0;
  virtual std::string name() const = 0;
};

class TrigramDice : public StringSimilarity {
 public:
  double score(std::string_view a, std::string_view b) const override;
  std::string name() const override { return "trigram-dice"; }
};

class TrigramJaccard : public StringSimilarity {
 public:
  double score(std::string_view a, std::string_view b) const override;
  std::string name() const override { return "trigram-jaccard"; }
};

struct BridgeHint {
  std::string question_span;
  std::string table;
  std::string column;
  std::string matched_value;  // verbatim cell text
  double score = 0.0;
};

inline constexpr double kBridgeThreshold = 0.7;

struct BridgeOptions {
  double threshold = kBridgeThreshold;
  std::size_t max_hints = 10;
  std::size_t max_cell_chars = 100;  // longer cells are not matched
  bool parallel = true;
  std::shared_ptr<const StringSimilarity> similarity;  // null: TrigramDice
};

/// Fuzzy matches between spans of `question` and text cells of the
/// structured tables, best first.
std::vector<BridgeHint> bridge_match(std::string_view question, const Database& db,
                                     const BridgeOptions& options = {});

/// Scoring core over explicit cells; `parallel` selects the OpenMP path.
struct BridgeCell {
  std::string table;
  std::string column;
  std::string value;
};
std::vector<BridgeHint> score_cells(std::string_view question, const std::vector<BridgeCell>& cells,
                                    const StringSimilarity& similarity, double threshold,
                                    bool parallel);

struct FewShot {
  std::string question;
  std::string blendsql;
  std::string serialized_db;  // optional
};

/// Reads a JSON array of {question, blendsql[, serialized_db]}.
std::vector<FewShot> read_few_shots(const std::string& path);

struct PromptTemplate {
  std::string system;
  std::string user;  // slots: few_shot_examples, serialized_db, question

  /// Reads `<dir>/parser_system.txt` and `<dir>/parser_user.txt`.
  static PromptTemplate from_dir(const std::string& dir);
};

/// Replaces {{name}} slots. Throws Error{Config} for an unknown slot.
std::string render_template(std::string_view tpl, const std::map<std::string, std::string>& slots);

struct ParserPrompt {
  std::string system;
  std::string user;
  std::vector<std::string> notes;  // trimming performed to fit the budget
  std::size_t chars() const { return system.size() + user.size(); }
};

struct PromptBudget {
  std::size_t max_chars = 0;  // 0: unlimited
};

/// Hint lines appended to the serialized database.
std::string format_hints(const std::vector<BridgeHint>& hints);

/// Fills the template. Over budget, example rows are dropped first, then
/// few-shots from the end; Error{PromptTooLarge} if it still does not fit.
ParserPrompt build_parser_prompt(const PromptTemplate& tpl, const std::vector<FewShot>& few_shots,
                                 const SerializedSchema& schema, std::string_view question,
                                 const std::vector<BridgeHint>& hints, const PromptBudget& budget = {});

/// Query text from a parser response: code fences and a leading
/// "BlendSQL:" label are removed.
std::string extract_query(std::string_view response);

}  // namespace hql
