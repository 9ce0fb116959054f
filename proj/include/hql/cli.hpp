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

// Library side of the `hql` command line tool.

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hql/blender.hpp"
#include "hql/context_prep.hpp"
#include "hql/smoothie.hpp"
#include "hql/storage.hpp"

namespace hql::cli {

/// Process exit codes of `hql run`.
enum ExitCode : int {
  kAnswered = 0,
  kFailure = 1,  // bad flags, unreadable input
  kNoResult = 2,
  kSyntaxError = 3,
  kExecutionError = 4,
};

// ---- denotation ----

/// Canonical answer text for denotation comparison.
std::string normalize_denotation(std::string_view value);

/// True when both sides normalize to the same set of answers.
bool denotation_match(const std::vector<std::string>& predicted, const std::vector<std::string>& gold);

// ---- ingest ----

struct IngestRequest {
  std::string db;
  std::vector<std::pair<std::string, std::string>> tables;  // name, CSV path
  std::string docs;                                          // JSONL path, optional
  FtsTokenizer tokenizer = FtsTokenizer::Trigram;
  bool index_column = true;
  bool overwrite = false;  // replace an existing file
};

/// Builds the database and returns {tables: {name: rows}, documents_present}.
nlohmann::json cmd_ingest(const IngestRequest& request);

// ---- run ----

struct ParserSetup {
  std::shared_ptr<Blender> parser;
  std::vector<FewShot> few_shots;
  PromptTemplate prompt;
  int example_rows = 3;
  PromptBudget budget;
  BridgeOptions bridge;
};

struct ParsedQuestion {
  std::string query;
  ParserPrompt prompt;
  std::vector<BridgeHint> hints;
};

/// Asks the parser model for a query answering `question`.
ParsedQuestion parse_question(const Database& db, const std::string& question, const ParserSetup& setup);

struct RunResult {
  int exit_code = kAnswered;
  nlohmann::json output;
};

/// Executes `query` and maps the outcome to an exit code. Never throws for
/// query errors; they are reported in `output.error`.
RunResult cmd_run(const Database& db, const std::string& query, Blender& blender,
                  const ExecuteOptions& options, bool include_ast = false, bool timing = true);

/// Human-readable trace.
std::string format_trace(const Smoothie& s);

// ---- eval ----

enum class EvalStatus { Answered, NoResult, SyntaxError, ExecutionError, FellBack };
std::string_view to_string(EvalStatus status);

struct GoldItem {
  std::string id;
  std::string question;
  std::vector<std::string> answers;
  std::string db;  // optional, relative to the database directory
};

struct EvalRecord {
  std::string id;
  std::string question;
  std::vector<std::string> gold_answers;
  std::optional<std::vector<std::string>> predicted;
  EvalStatus status = EvalStatus::NoResult;
  bool denotation_correct = false;
  std::size_t values_passed = 0;
  std::size_t prompt_chars = 0;
  std::string query;
  std::string error;

  nlohmann::json to_json() const;
};

/// Returns an answer for a question that produced no result, or nullopt.
using FallbackHandler = std::function<std::optional<std::string>(const GoldItem&)>;

struct EvalConfig {
  std::string db;      // used when an item names no database
  std::string db_dir;  // base directory for GoldItem::db
  Blender* blender = nullptr;
  const ParserSetup* parser = nullptr;           // generate queries from questions
  std::map<std::string, std::string> predictions;  // id -> query
  bool fallback = false;
  FallbackHandler fallback_handler;  // null: report unanswered
  int jobs = 1;
  ExecuteOptions execute;
};

struct EvalReport {
  std::vector<EvalRecord> records;  // gold order
  std::vector<std::string> missing;  // ids without a query, or predictions without gold
  nlohmann::json metrics() const;
};

std::vector<GoldItem> read_gold(const std::string& path);
/// JSONL {id, query}.
std::map<std::string, std::string> read_predictions(const std::string& path);

EvalReport cmd_eval(const std::vector<GoldItem>& gold, const EvalConfig& config);

// ---- savings ----

struct SavingsReport {
  std::size_t prompt_chars = 0;           // with push-down
  std::size_t baseline_prompt_chars = 0;  // ingredients over full inputs
  std::size_t values_passed = 0;
  std::size_t baseline_values_passed = 0;
  double reduction = 0.0;  // fraction of baseline characters saved

  nlohmann::json to_json() const;
};

SavingsReport cmd_savings(const Database& db, const std::string& query, Blender& blender,
                          const ExecuteOptions& options = {});

// ---- entry point ----

int run_main(int argc, char** argv);

}  // namespace hql::cli
