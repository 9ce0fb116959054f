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

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "hql/cli.hpp"
#include "hql/planner.hpp"

#ifndef HQL_DATA_DIR
#define HQL_DATA_DIR "data"
#endif

namespace hql::cli {

namespace {

struct Common {
  std::string db;
  std::string blender;
  std::string parser;
  std::string few_shots;
  std::string templates;
  int rows = 3;
  std::size_t prompt_budget = 0;
  bool no_pushdown = false;
  bool no_cache = false;
  bool strict = false;
  std::size_t batch_size = 5;
  bool json = false;
};

std::string default_templates() {
  const char* env = std::getenv("HQL_DATA_DIR");
  return std::string(env && *env ? env : HQL_DATA_DIR) + "/templates";
}

std::shared_ptr<Blender> blender_from(const std::string& spec) {
  if (spec.empty()) {
    return std::make_shared<FunctionBlender>(
        [](const BlenderRequest&) -> std::string {
          throw Error(ErrorCode::Config, "no blender configured; pass --blender");
        },
        "none");
  }
  return make_blender(spec);
}

ExecuteOptions execute_options(const Common& c) {
  ExecuteOptions o;
  o.pushdown = !c.no_pushdown;
  o.cache = !c.no_cache;
  o.ingredients.strict = c.strict;
  o.ingredients.batch_size = std::max<std::size_t>(1, c.batch_size);
  return o;
}

ParserSetup parser_setup(const Common& c) {
  ParserSetup p;
  p.parser = blender_from(c.parser.empty() ? c.blender : c.parser);
  if (!c.few_shots.empty()) p.few_shots = read_few_shots(c.few_shots);
  p.prompt = PromptTemplate::from_dir(c.templates.empty() ? default_templates() : c.templates);
  p.example_rows = c.rows;
  p.budget.max_chars = c.prompt_budget;
  return p;
}

void add_execution_flags(CLI::App* app, Common& c) {
  app->add_option("--blender", c.blender, "Ingredient model: lookup:FILE | lookup-strict:FILE | echo | remote");
  app->add_flag("--no-pushdown", c.no_pushdown, "Give ingredients their whole input");
  app->add_flag("--no-cache", c.no_cache, "Disable the per-execution ingredient cache");
  app->add_flag("--strict", c.strict, "A failed Map batch aborts the query");
  app->add_option("--batch-size", c.batch_size, "Values per Map / Join prompt");
}

void add_parser_flags(CLI::App* app, Common& c) {
  app->add_option("--parser", c.parser, "Parser model (defaults to --blender)");
  app->add_option("--few-shots", c.few_shots, "JSON array of {question, blendsql}");
  app->add_option("--templates", c.templates, "Directory with parser_system.txt and parser_user.txt");
  app->add_option("--rows", c.rows, "Example rows per table in the parser prompt");
  app->add_option("--prompt-budget", c.prompt_budget, "Parser prompt character budget (0 = none)");
}

void print_json(const nlohmann::json& j, bool compact) {
  std::cout << (compact ? j.dump() : j.dump(2)) << "\n";
}

}  // namespace

int run_main(int argc, char** argv) {
  CLI::App app{"Hybrid SQL with model-backed ingredients"};
  app.require_subcommand(1);
  Common c;

  // ingest
  IngestRequest ingest;
  std::vector<std::string> table_args;
  std::string tokenizer = "trigram";
  auto* ingest_cmd = app.add_subcommand("ingest", "Build a database from CSV tables and JSONL documents");
  ingest_cmd->add_option("--db", ingest.db, "Output database file")->required();
  ingest_cmd->add_option("--table", table_args, "NAME=CSV, repeatable");
  ingest_cmd->add_option("--docs", ingest.docs, "JSONL with {title, content} per line");
  ingest_cmd->add_option("--tokenizer", tokenizer, "trigram | unicode61")
      ->check(CLI::IsMember({"trigram", "unicode61"}));
  ingest_cmd->add_flag("--force", ingest.overwrite, "Replace an existing output file");
  bool no_index = false;
  ingest_cmd->add_flag("--no-index", no_index, "Do not add the 0-based index column");
  ingest_cmd->add_flag("--json", c.json, "Compact JSON output");

  // run / trace
  std::string query;
  std::string question;
  bool parse = false;
  bool ast = false;
  bool plan_only = false;
  auto* run_cmd = app.add_subcommand("run", "Execute a query and print the result with its trace");
  auto* trace_cmd = app.add_subcommand("trace", "Execute a query and print its trace");
  for (auto* cmd : {run_cmd, trace_cmd}) {
    cmd->add_option("--db", c.db, "Database file")->required();
    cmd->add_option("--query", query, "Query text");
    cmd->add_option("--question", question, "Question for the parser model (with --parse)");
    cmd->add_flag("--parse", parse, "Generate the query from --question");
    cmd->add_flag("--json", c.json, "Compact JSON output");
    add_execution_flags(cmd, c);
    add_parser_flags(cmd, c);
  }
  run_cmd->add_flag("--ast", ast, "Include the syntax tree");
  trace_cmd->add_flag("--plan", plan_only, "Print the static plan without executing");

  // eval
  std::string gold_path;
  std::string predictions_path;
  std::string db_dir;
  std::string records_path;
  bool fallback = false;
  int jobs = 1;
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against gold answers");
  eval_cmd->add_option("--db", c.db, "Database used by records without a db field");
  eval_cmd->add_option("--db-dir", db_dir, "Directory for per-record databases");
  eval_cmd->add_option("--gold", gold_path, "JSONL {id, question, answers}")->required();
  eval_cmd->add_option("--predictions", predictions_path, "JSONL {id, query}");
  eval_cmd->add_flag("--parse", parse, "Generate queries from questions");
  eval_cmd->add_flag("--fallback", fallback, "Mark no-result records as fallen back");
  eval_cmd->add_option("--jobs", jobs, "Records evaluated concurrently")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--records", records_path, "Write per-record JSONL here instead of stdout");
  eval_cmd->add_flag("--json", c.json, "Compact JSON output");
  add_execution_flags(eval_cmd, c);
  add_parser_flags(eval_cmd, c);

  // savings
  auto* savings_cmd = app.add_subcommand("savings", "Prompt characters with and without push-down");
  savings_cmd->add_option("--db", c.db, "Database file")->required();
  savings_cmd->add_option("--query", query, "Query text")->required();
  savings_cmd->add_flag("--json", c.json, "Compact JSON output");
  add_execution_flags(savings_cmd, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kFailure;
  }

  try {
    if (ingest_cmd->parsed()) {
      ingest.index_column = !no_index;
      ingest.tokenizer = tokenizer == "unicode61" ? FtsTokenizer::Unicode61 : FtsTokenizer::Trigram;
      for (const auto& arg : table_args) {
        auto eq = arg.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw Error(ErrorCode::Config, "--table expects NAME=CSV, got '" + arg + "'");
        }
        ingest.tables.emplace_back(arg.substr(0, eq), arg.substr(eq + 1));
      }
      print_json(cmd_ingest(ingest), c.json);
      return 0;
    }

    if (run_cmd->parsed() || trace_cmd->parsed()) {
      Database db = Database::open(c.db);
      nlohmann::json parsed_info;
      if (parse) {
        if (question.empty()) throw Error(ErrorCode::Config, "--parse needs --question");
        ParsedQuestion pq = parse_question(db, question, parser_setup(c));
        query = pq.query;
        parsed_info = {{"question", question}, {"prompt_chars", pq.prompt.chars()}};
        if (!pq.prompt.notes.empty()) parsed_info["notes"] = pq.prompt.notes;
      }
      if (query.empty()) throw Error(ErrorCode::Config, "give --query, or --question with --parse");

      if (trace_cmd->parsed() && plan_only) {
        try {
          QueryAst parsed = parse_query(query);
          PlanOptions po;
          po.pushdown = !c.no_pushdown;
          print_json(plan(parsed, db.schema(), po).to_json(), c.json);
          return kAnswered;
        } catch (const SyntaxError& e) {
          std::cerr << "syntax error: " << e.what() << "\n";
          return kSyntaxError;
        } catch (const Error& e) {
          std::cerr << "plan error: " << e.what() << "\n";
          return kExecutionError;
        }
      }

      auto blender = blender_from(c.blender);
      ExecuteOptions opts = execute_options(c);
      if (trace_cmd->parsed() && !c.json) {
        try {
          Smoothie s = execute(db, query, *blender, opts);
          std::cout << format_trace(s);
          return s.outcome == Outcome::Answered ? kAnswered : kNoResult;
        } catch (const SyntaxError& e) {
          std::cerr << "syntax error: " << e.what() << "\n";
          return kSyntaxError;
        } catch (const Error& e) {
          std::cerr << "execution error: " << e.what() << "\n";
          return kExecutionError;
        }
      }
      RunResult r = cmd_run(db, query, *blender, opts, ast);
      if (!parsed_info.is_null()) r.output["parse"] = parsed_info;
      if (trace_cmd->parsed()) {
        nlohmann::json t{{"status", r.output["status"]}};
        if (r.output.contains("steps")) t["steps"] = r.output["steps"];
        if (r.output.contains("error")) t["error"] = r.output["error"];
        print_json(t, c.json);
      } else {
        print_json(r.output, c.json);
      }
      if (r.output.contains("error")) std::cerr << r.output["error"]["message"].get<std::string>() << "\n";
      return r.exit_code;
    }

    if (eval_cmd->parsed()) {
      auto blender = blender_from(c.blender);
      EvalConfig cfg;
      cfg.db = c.db;
      cfg.db_dir = db_dir;
      cfg.blender = blender.get();
      cfg.fallback = fallback;
      cfg.jobs = jobs;
      cfg.execute = execute_options(c);
      if (!predictions_path.empty()) cfg.predictions = read_predictions(predictions_path);
      ParserSetup setup;
      if (parse) {
        setup = parser_setup(c);
        cfg.parser = &setup;
      }
      EvalReport report = cmd_eval(read_gold(gold_path), cfg);
      nlohmann::json metrics = report.metrics();
      if (!records_path.empty()) {
        std::ofstream out(records_path);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + records_path);
        for (const auto& r : report.records) out << r.to_json().dump() << "\n";
        print_json(metrics, c.json);
      } else {
        std::cout << metrics.dump() << "\n";
        for (const auto& r : report.records) std::cout << r.to_json().dump() << "\n";
      }
      return 0;
    }

    if (savings_cmd->parsed()) {
      Database db = Database::open(c.db);
      auto blender = blender_from(c.blender);
      SavingsReport r = cmd_savings(db, query, *blender, execute_options(c));
      print_json(r.to_json(), c.json);
      return 0;
    }
  } catch (const SyntaxError& e) {
    std::cerr << "syntax error: " << e.what() << "\n";
    return kSyntaxError;
  } catch (const ExecutionError& e) {
    std::cerr << "execution error: " << e.what() << "\n";
    return kExecutionError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace hql::cli
