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

#include <cstdio>

#include "hql/cli.hpp"

namespace hql::cli {

ParsedQuestion parse_question(const Database& db, const std::string& question, const ParserSetup& setup) {
  if (!setup.parser) throw Error(ErrorCode::Config, "no parser model configured");
  ParsedQuestion out;
  SerializedSchema schema = serialize_schema(db, setup.example_rows);
  out.hints = bridge_match(question, db, setup.bridge);
  out.prompt = build_parser_prompt(setup.prompt, setup.few_shots, schema, question, out.hints, setup.budget);

  BlenderRequest req;
  req.system_prompt = out.prompt.system;
  req.user_prompt = out.prompt.user;
  req.max_output = 1024;
  TaskPayload task;
  task.kind = "parse";
  task.question = question;
  req.task = task;
  out.query = extract_query(setup.parser->complete(req).text);
  return out;
}

RunResult cmd_run(const Database& db, const std::string& query, Blender& blender,
                  const ExecuteOptions& options, bool include_ast, bool timing) {
  RunResult r;
  nlohmann::json& out = r.output;
  out["query"] = query;
  try {
    QueryAst ast = parse_query(query, options.registry);
    if (include_ast) out["ast"] = ast_to_json(ast);
    Smoothie s = execute(db, ast, blender, options);
    out.update(s.to_json(timing));
    r.exit_code = s.outcome == Outcome::Answered ? kAnswered : kNoResult;
  } catch (const SyntaxError& e) {
    out["status"] = "syntax_error";
    out["error"] = {{"code", "syntax"},
                    {"message", e.what()},
                    {"span", {e.span().begin, e.span().end}}};
    r.exit_code = kSyntaxError;
  } catch (const ExecutionError& e) {
    out["status"] = "execution_error";
    out["error"] = {{"code", std::string(to_string(e.cause()))},
                    {"step", e.step()},
                    {"step_kind", e.step_kind()},
                    {"message", e.what()}};
    r.exit_code = kExecutionError;
  } catch (const Error& e) {
    out["status"] = "execution_error";
    out["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    r.exit_code = kExecutionError;
  }
  return r;
}

std::string format_trace(const Smoothie& s) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    const TraceEntry& e = s.steps[i];
    out += "[" + std::to_string(i + 1) + "] " + std::string(to_string(e.kind));
    if (!e.ingredient.empty()) out += " " + e.ingredient;
    if (e.kind == StepKind::Ingredient) {
      out += "  values=" + std::to_string(e.values_passed) + " calls=" + std::to_string(e.model_calls) +
             " prompt_chars=" + std::to_string(e.prompt_chars);
    } else {
      out += "  rows=" + std::to_string(e.input_rows);
    }
    std::snprintf(buf, sizeof buf, "  %.1f ms", e.wall_ms);
    out += buf;
    out += "\n    " + e.text + "\n";
    if (!e.output.empty()) out += "    -> " + e.output + "\n";
    for (const auto& n : e.notes) out += "    note: " + n + "\n";
  }
  out += "status: " + std::string(to_string(s.outcome));
  if (!s.reason.empty()) out += " (" + s.reason + ")";
  out += "\nrows: " + std::to_string(s.result.row_count()) +
         "  ingredient_calls=" + std::to_string(s.totals.ingredient_calls) +
         " values_passed=" + std::to_string(s.totals.values_passed) +
         " prompt_chars=" + std::to_string(s.totals.prompt_chars) + "\n";
  return out;
}

}  // namespace hql::cli
