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

#include <chrono>
#include <map>
#include <set>
#include <tuple>

#include "hql/smoothie.hpp"
#include "plan_internal.hpp"

namespace hql {

using namespace detail;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Distinct non-NULL values in first-seen order, compared by text.
struct DistinctValues {
  std::vector<Value> values;
  std::vector<std::string> texts;
};

DistinctValues distinct_column(const Table& t, std::size_t col = 0) {
  DistinctValues out;
  std::set<std::string> seen;
  for (const auto& row : t.rows) {
    if (col >= row.size() || is_null(row[col])) continue;
    std::string text = to_text(row[col]);
    if (seen.insert(text).second) {
      out.values.push_back(row[col]);
      out.texts.push_back(std::move(text));
    }
  }
  return out;
}

std::string cache_kind(const IngredientCall& call) {
  return call.kind == IngredientKind::Custom ? to_lower(call.name) : std::string(to_string(call.kind));
}

class Executor {
 public:
  Executor(const Database& db, Blender& blender, const ExecuteOptions& options)
      : db_(db), blender_(blender), opt_(options), scope_(db) {}

  Smoothie run(QueryAst ast) {
    while (!ast.ingredients().empty()) {
      const IngredientCall call = ast.ingredients().front();
      schema_ = db_.schema();
      std::optional<IngredientArtifact> artifact;
      try {
        artifact = guarded(StepKind::Ingredient, [&] { return run_call(ast, call); });
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyContext) throw;
        TraceEntry entry;
        entry.kind = StepKind::Ingredient;
        entry.ingredient = call.name;
        entry.text = call.question;
        entry.output = "no result";
        entry.notes.push_back(e.what());
        out_.steps.push_back(std::move(entry));
        out_.outcome = Outcome::NoResult;
        out_.reason = e.what();
        return finish();
      }
      TraceEntry entry;
      entry.kind = StepKind::Substitute;
      entry.ingredient = call.name;
      entry.text = substitution_text(*artifact);
      auto t0 = Clock::now();
      ast = guarded(StepKind::Substitute,
                    [&] { return substitute(ast, call, *artifact, opt_.registry); });
      entry.wall_ms = ms_since(t0);
      out_.steps.push_back(std::move(entry));
    }

    TraceEntry entry;
    entry.kind = StepKind::FinalQuery;
    auto t0 = Clock::now();
    entry.text = guarded(StepKind::FinalQuery, [&] { return render_native(ast, {}); });
    out_.result = guarded(StepKind::FinalQuery, [&] { return db_.query(entry.text); });
    entry.wall_ms = ms_since(t0);
    entry.input_rows = out_.result.row_count();
    entry.output = std::to_string(out_.result.row_count()) + " row(s)";
    note_bm25(entry);
    out_.final_sql = entry.text;
    out_.steps.push_back(std::move(entry));
    if (out_.result.empty()) {
      out_.outcome = Outcome::NoResult;
      out_.reason = "final query returned no rows";
    }
    return finish();
  }

 private:
  template <class F>
  auto guarded(StepKind kind, F&& fn) -> decltype(fn()) {
    try {
      return fn();
    } catch (const ExecutionError&) {
      throw;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EmptyContext) throw;
      throw ExecutionError(out_.steps.size(), std::string(to_string(kind)), e.code(), e.what());
    } catch (const std::exception& e) {
      throw ExecutionError(out_.steps.size(), std::string(to_string(kind)), ErrorCode::Execution,
                           e.what());
    }
  }

  Smoothie finish() {
    for (const TraceEntry& s : out_.steps) {
      if (s.kind != StepKind::Ingredient) continue;
      ++out_.totals.ingredient_calls;
      out_.totals.model_calls += s.model_calls;
      out_.totals.values_passed += s.values_passed;
      out_.totals.prompt_chars += s.prompt_chars;
    }
    return std::move(out_);
  }

  static void note_bm25(TraceEntry& e) {
    if (to_lower(e.text).find(" match ") != std::string::npos) {
      e.notes.push_back("bm25 k1=" + std::to_string(kBm25K1).substr(0, 3) +
                        " b=" + std::to_string(kBm25B).substr(0, 4));
    }
  }

  SessionTable materialize(const PushdownQuery& q, const std::string& label) {
    TraceEntry e;
    e.kind = StepKind::NativeSubquery;
    e.text = q.sql;
    auto t0 = Clock::now();
    SessionTable st = guarded(StepKind::NativeSubquery, [&] { return scope_.materialize(q.sql); });
    e.wall_ms = ms_since(t0);
    e.input_rows = st.row_count;
    e.output = label + " -> " + st.name + " (" + std::to_string(st.row_count) + " rows)";
    for (const auto& p : q.pushed) e.notes.push_back("pushed: " + p);
    note_bm25(e);
    out_.steps.push_back(std::move(e));
    return st;
  }

  Table native(const std::string& sql, const std::string& label) {
    TraceEntry e;
    e.kind = StepKind::NativeSubquery;
    e.text = sql;
    auto t0 = Clock::now();
    Table t = guarded(StepKind::NativeSubquery, [&] { return db_.query(sql); });
    e.wall_ms = ms_since(t0);
    e.input_rows = t.row_count();
    e.output = label + " (" + std::to_string(t.row_count()) + " rows)";
    note_bm25(e);
    out_.steps.push_back(std::move(e));
    return t;
  }

  DistinctValues session_values(const SessionTable& st) {
    return distinct_column(db_.query("SELECT \"value\" FROM " + quote_ident(st.name) + " ORDER BY rowid"));
  }

  std::optional<Table> context_for(const QueryAst& ast, const IngredientCall& call) {
    if (call.context_subquery != kNoNode) {
      return native(render_native(ast, {}, ast.node(call.context_subquery).children.front()), "context");
    }
    if (call.target_column) {
      return native(column_sql(ast, call.node, *call.target_column, schema_, {}), "context");
    }
    return std::nullopt;
  }

  DistinctValues options_for(const QueryAst& ast, const IngredientCall& call) {
    if (!call.options) return {};
    return distinct_column(native(column_sql(ast, call.node, *call.options, schema_, {}), "options"));
  }

  void record(TraceEntry& e, const CountingBlender& counting, Clock::time_point t0) {
    Usage u = counting.usage();
    e.kind = StepKind::Ingredient;
    e.prompt_chars = u.prompt_chars;
    e.model_calls = u.calls;
    e.prompts = counting.prompts();
    e.wall_ms = ms_since(t0);
  }

  IngredientArtifact run_call(const QueryAst& ast, const IngredientCall& call) {
    if (is_scalar_call(call)) return run_scalar(ast, call);
    if (call.kind == IngredientKind::Join) return run_join(ast, call);
    if (call.kind == IngredientKind::Validate) return run_validate(ast, call);
    return run_aggregate(ast, call);
  }

  const CustomHandler& custom_handler(const IngredientCall& call) {
    auto it = handlers_.find(to_lower(call.name));
    if (it != handlers_.end()) return it->second;
    std::optional<CustomHandler> h;
    if (opt_.registry) h = opt_.registry->handler(call.name);
    if (!h) throw Error(ErrorCode::Plan, "no handler registered for ingredient " + call.name);
    return handlers_.emplace(to_lower(call.name), std::move(*h)).first->second;
  }

  MapArtifact run_scalar(const QueryAst& ast, const IngredientCall& call) {
    ColumnSource src = resolve_map_target(ast, call, schema_);
    PushdownQuery q = build_pushdown(ast, call.node, src, opt_.pushdown, schema_, {});
    SessionTable input = materialize(q, "input");
    DistinctValues dv = session_values(input);
    DistinctValues options = options_for(ast, call);

    const std::string kind = cache_kind(call);
    std::map<std::string, Value> by_text;
    std::vector<std::string> send;
    for (const auto& text : dv.texts) {
      auto hit = opt_.cache ? cache_.find({kind, call.question, text}) : cache_.end();
      if (hit != cache_.end()) {
        by_text[text] = hit->second;
      } else {
        send.push_back(text);
      }
    }

    TraceEntry e;
    e.ingredient = call.name;
    e.text = call.question;
    e.input_rows = dv.values.size();
    e.values_passed = send.size();
    CountingBlender counting(blender_);
    auto t0 = Clock::now();
    if (!send.empty()) {
      std::vector<Value> outputs;
      if (call.kind == IngredientKind::Map) {
        MapTask task{call.question, send, infer_output_hint(ast, call), options.texts};
        MapResult r = exec_map(task, counting, opt_.ingredients);
        outputs = std::move(r.outputs);
        e.notes = std::move(r.warnings);
      } else {
        const auto* h = std::get_if<ScalarHandler>(&custom_handler(call));
        if (!h) throw Error(ErrorCode::TypeMismatch, call.name + " is not a scalar ingredient");
        outputs = (*h)(call.question, send, counting);
        if (outputs.size() != send.size()) {
          throw Error(ErrorCode::Execution, call.name + " returned " + std::to_string(outputs.size()) +
                                                " values for " + std::to_string(send.size()) + " inputs");
        }
      }
      for (std::size_t i = 0; i < send.size(); ++i) {
        by_text[send[i]] = outputs[i];
        if (opt_.cache) cache_[{kind, call.question, send[i]}] = outputs[i];
      }
    }
    record(e, counting, t0);
    e.output = std::to_string(dv.values.size()) + " value(s) mapped, " +
               std::to_string(dv.values.size() - send.size()) + " from cache";
    out_.steps.push_back(std::move(e));

    std::vector<std::vector<Value>> rows;
    for (const auto& v : dv.values) rows.push_back({v, by_text[to_text(v)]});
    SessionTable mapped = scope_.create("map", {"value", "result"}, rows);
    db_.exec("CREATE INDEX " + quote_ident(mapped.name + "_value") + " ON " + quote_ident(mapped.name) +
             " (\"value\")");
    return MapArtifact{mapped.name, q.qualifier_sql, q.column};
  }

  std::string context_key(const std::optional<Table>& ctx, const DistinctValues& options) {
    std::string key = ctx ? to_json(*ctx).dump() : std::string("-");
    for (const auto& o : options.texts) key += "\x1f" + o;
    return key;
  }

  ScalarArtifact run_aggregate(const QueryAst& ast, const IngredientCall& call) {
    std::optional<Table> ctx = context_for(ast, call);
    DistinctValues options = options_for(ast, call);
    if (call.options && options.texts.empty()) {
      throw Error(ErrorCode::EmptyContext, "options column " + call.options->str() + " has no values");
    }
    if (ctx && ctx->empty()) throw Error(ErrorCode::EmptyContext, call.name + " context has no rows");

    TraceEntry e;
    e.ingredient = call.name;
    e.text = call.question;
    e.input_rows = ctx ? ctx->row_count() : 0;
    CountingBlender counting(blender_);
    auto t0 = Clock::now();

    const std::tuple<std::string, std::string, std::string> key{cache_kind(call), call.question,
                                                                context_key(ctx, options)};
    Value answer;
    if (auto hit = opt_.cache ? cache_.find(key) : cache_.end(); hit != cache_.end()) {
      answer = hit->second;
      e.notes.push_back("answer from cache");
    } else {
      e.values_passed = e.input_rows;
      std::string text;
      if (call.kind == IngredientKind::QA) {
        QaResult r = exec_qa(QaTask{call.question, ctx, options.texts}, counting, opt_.ingredients);
        text = r.answer;
      } else {
        const auto* h = std::get_if<AggregateHandler>(&custom_handler(call));
        if (!h) throw Error(ErrorCode::TypeMismatch, call.name + " is not an aggregate ingredient");
        Value v = (*h)(call.question, ctx.value_or(Table{}), options.texts, counting);
        if (options.texts.empty()) {
          answer = v;
        } else {
          auto m = match_option(to_text(v), options.texts);
          if (!m) {
            throw Error(ErrorCode::ConstraintViolation,
                        call.name + " answered '" + to_text(v) + "', which is not an option");
          }
          text = *m;
        }
      }
      if (!options.texts.empty()) {
        for (std::size_t i = 0; i < options.texts.size(); ++i) {
          if (options.texts[i] == text) answer = options.values[i];
        }
      } else if (call.kind == IngredientKind::QA) {
        answer = coerce_scalar(text);
      }
      if (opt_.cache) cache_[key] = answer;
    }
    record(e, counting, t0);
    e.output = sql_literal(answer);
    out_.steps.push_back(std::move(e));
    return ScalarArtifact{answer};
  }

  VerdictArtifact run_validate(const QueryAst& ast, const IngredientCall& call) {
    std::optional<Table> ctx = context_for(ast, call);
    if (ctx && ctx->empty()) throw Error(ErrorCode::EmptyContext, call.name + " context has no rows");
    TraceEntry e;
    e.ingredient = call.name;
    e.text = call.question;
    e.input_rows = ctx ? ctx->row_count() : 0;
    CountingBlender counting(blender_);
    auto t0 = Clock::now();
    const std::tuple<std::string, std::string, std::string> key{cache_kind(call), call.question,
                                                                context_key(ctx, {})};
    bool verdict = false;
    if (auto hit = opt_.cache ? cache_.find(key) : cache_.end(); hit != cache_.end()) {
      verdict = std::get<std::int64_t>(hit->second) != 0;
      e.notes.push_back("answer from cache");
    } else {
      e.values_passed = e.input_rows;
      verdict = exec_validate(ValidateTask{call.question, ctx}, counting, opt_.ingredients).verdict;
      if (opt_.cache) cache_[key] = Value{std::int64_t{verdict ? 1 : 0}};
    }
    record(e, counting, t0);
    e.output = verdict ? "true" : "false";
    out_.steps.push_back(std::move(e));
    return VerdictArtifact{verdict};
  }

  JoinArtifact run_join(const QueryAst& ast, const IngredientCall& call) {
    JoinSides js = resolve_join(ast, call, schema_);
    DistinctValues left;
    if (js.left_subquery != kNoNode) {
      left = distinct_column(
          native(render_native(ast, {}, ast.node(js.left_subquery).children.front()), "left values"));
    } else {
      PushdownQuery lq = build_pushdown(ast, call.node, js.left, opt_.pushdown, schema_, {});
      left = session_values(materialize(lq, "left values"));
    }
    PushdownQuery rq = build_pushdown(ast, call.node, js.right, opt_.pushdown, schema_, {});
    DistinctValues right = session_values(materialize(rq, "right values"));

    TraceEntry e;
    e.ingredient = call.name;
    e.text = call.question;
    e.input_rows = left.values.size() + right.values.size();
    e.values_passed = left.values.size();
    CountingBlender counting(blender_);
    auto t0 = Clock::now();
    std::vector<std::vector<Value>> rows;
    if (!left.texts.empty() && !right.texts.empty()) {
      JoinResult r = exec_join(JoinTask{call.question, left.texts, right.texts}, counting, opt_.ingredients);
      auto value_of = [](const DistinctValues& dv, const std::string& text) {
        for (std::size_t i = 0; i < dv.texts.size(); ++i) {
          if (dv.texts[i] == text) return dv.values[i];
        }
        return Value{text};
      };
      for (const auto& [l, rt] : r.pairs) rows.push_back({value_of(left, l), value_of(right, rt)});
      e.notes.push_back(std::to_string(r.exact_matches) + " exact match(es)");
    }
    record(e, counting, t0);
    e.output = std::to_string(rows.size()) + " pair(s)";
    out_.steps.push_back(std::move(e));

    SessionTable aux = scope_.create("join", {"left", "right"}, rows);
    JoinArtifact a;
    a.table = aux.name;
    a.from_item = js.from_item;
    a.left = {js.left.item.qualifier_sql, js.left.column, js.left.introduced ? js.left.item.table_sql : ""};
    a.right = {js.right.item.qualifier_sql, js.right.column,
               js.right.introduced ? js.right.item.table_sql : ""};
    return a;
  }

  const Database& db_;
  Blender& blender_;
  ExecuteOptions opt_;
  SessionScope scope_;
  DatabaseSchema schema_;
  Smoothie out_;
  std::map<std::tuple<std::string, std::string, std::string>, Value> cache_;
  std::map<std::string, CustomHandler> handlers_;
};

}  // namespace

BlenderResponse CountingBlender::complete(const BlenderRequest& request) {
  BlenderResponse resp = inner_.complete(request);
  std::lock_guard<std::mutex> lock(mu_);
  usage_ += Usage{request.prompt_chars(), resp.text.size(), 1};
  prompts_.push_back(request.user_prompt);
  return resp;
}

Usage CountingBlender::usage() const {
  std::lock_guard<std::mutex> lock(mu_);
  return usage_;
}

std::vector<std::string> CountingBlender::prompts() const {
  std::lock_guard<std::mutex> lock(mu_);
  return prompts_;
}

void CountingBlender::reset() {
  std::lock_guard<std::mutex> lock(mu_);
  usage_ = {};
  prompts_.clear();
}

Smoothie execute(const Database& db, const QueryAst& ast, Blender& blender,
                 const ExecuteOptions& options) {
  Executor ex(db, blender, options);
  return ex.run(ast);
}

Smoothie execute(const Database& db, std::string_view query, Blender& blender,
                 const ExecuteOptions& options) {
  return execute(db, parse_query(query, options.registry), blender, options);
}

}  // namespace hql
