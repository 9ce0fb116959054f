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
#include <filesystem>
#include <fstream>
#include <set>

#include "hql/cli.hpp"

namespace hql::cli {

namespace {

std::string id_text(const nlohmann::json& j) {
  return j.is_string() ? j.get<std::string>() : j.dump();
}

template <class Fn>
void for_each_jsonl(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Ingest, path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

std::string db_path(const GoldItem& item, const EvalConfig& config) {
  if (item.db.empty()) return config.db;
  if (config.db_dir.empty()) return item.db;
  return (std::filesystem::path(config.db_dir) / item.db).string();
}

std::vector<std::string> first_column(const Table& t) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& row : t.rows) {
    if (row.empty() || is_null(row[0])) continue;
    std::string v = to_text(row[0]);
    if (seen.insert(v).second) out.push_back(v);
  }
  return out;
}

void evaluate(const GoldItem& item, const std::string& query, const EvalConfig& config, EvalRecord& rec) {
  rec.query = query;
  try {
    Database db = Database::open(db_path(item, config));
    if (rec.query.empty()) rec.query = parse_question(db, item.question, *config.parser).query;
    QueryAst ast = parse_query(rec.query, config.execute.registry);
    Smoothie s = execute(db, ast, *config.blender, config.execute);
    rec.values_passed = s.totals.values_passed;
    rec.prompt_chars = s.totals.prompt_chars;
    auto values = first_column(s.result);
    if (s.outcome == Outcome::Answered && !values.empty()) {
      rec.status = EvalStatus::Answered;
      rec.predicted = values;
    } else {
      rec.status = EvalStatus::NoResult;
      rec.error = s.reason.empty() ? "result has no values" : s.reason;
    }
  } catch (const SyntaxError& e) {
    rec.status = EvalStatus::SyntaxError;
    rec.error = e.what();
  } catch (const std::exception& e) {
    rec.status = EvalStatus::ExecutionError;
    rec.error = e.what();
  }
  if (rec.status == EvalStatus::NoResult && config.fallback) {
    rec.status = EvalStatus::FellBack;
    if (config.fallback_handler) {
      if (auto answer = config.fallback_handler(item)) rec.predicted = std::vector<std::string>{*answer};
    }
  }
  rec.denotation_correct = (rec.status == EvalStatus::Answered || rec.status == EvalStatus::FellBack) &&
                           rec.predicted && denotation_match(*rec.predicted, rec.gold_answers);
}

}  // namespace

std::string_view to_string(EvalStatus status) {
  switch (status) {
    case EvalStatus::Answered: return "Answered";
    case EvalStatus::NoResult: return "NoResult";
    case EvalStatus::SyntaxError: return "SyntaxError";
    case EvalStatus::ExecutionError: return "ExecutionError";
    case EvalStatus::FellBack: return "FellBack";
  }
  return "Unknown";
}

nlohmann::json EvalRecord::to_json() const {
  nlohmann::json j{{"id", id},
                   {"question", question},
                   {"gold_answers", gold_answers},
                   {"predicted", nullptr},
                   {"status", std::string(cli::to_string(status))},
                   {"denotation_correct", denotation_correct},
                   {"values_passed", values_passed},
                   {"prompt_chars", prompt_chars},
                   {"query", query}};
  if (predicted) j["predicted"] = *predicted;
  if (!error.empty()) j["error"] = error;
  return j;
}

nlohmann::json EvalReport::metrics() const {
  std::size_t n = records.size();
  std::map<EvalStatus, std::size_t> by_status;
  std::size_t correct = 0;
  std::size_t values = 0;
  std::size_t chars = 0;
  for (const auto& r : records) {
    ++by_status[r.status];
    correct += r.denotation_correct ? 1 : 0;
    values += r.values_passed;
    chars += r.prompt_chars;
  }
  auto frac = [n](std::size_t k) { return n ? static_cast<double>(k) / static_cast<double>(n) : 0.0; };
  return {{"count", n},
          {"accuracy", frac(correct)},
          {"bad_syntax", frac(by_status[EvalStatus::SyntaxError])},
          {"no_result", frac(by_status[EvalStatus::NoResult])},
          {"fell_back", frac(by_status[EvalStatus::FellBack])},
          {"execution_error", frac(by_status[EvalStatus::ExecutionError])},
          {"mean_values_passed", frac(values)},
          {"mean_prompt_chars", frac(chars)},
          {"prompt_unit", "characters"},
          {"missing", missing}};
}

std::vector<GoldItem> read_gold(const std::string& path) {
  std::vector<GoldItem> out;
  for_each_jsonl(path, [&](const nlohmann::json& j) {
    GoldItem g;
    g.id = id_text(j.at("id"));
    g.question = j.value("question", "");
    if (j.contains("answers")) {
      for (const auto& a : j["answers"]) g.answers.push_back(a.is_string() ? a.get<std::string>() : a.dump());
    } else if (j.contains("answer")) {
      const auto& a = j["answer"];
      g.answers.push_back(a.is_string() ? a.get<std::string>() : a.dump());
    }
    g.db = j.value("db", "");
    out.push_back(std::move(g));
  });
  return out;
}

std::map<std::string, std::string> read_predictions(const std::string& path) {
  std::map<std::string, std::string> out;
  for_each_jsonl(path, [&](const nlohmann::json& j) {
    out[id_text(j.at("id"))] = j.at("query").get<std::string>();
  });
  return out;
}

EvalReport cmd_eval(const std::vector<GoldItem>& gold, const EvalConfig& config) {
  if (!config.blender) throw Error(ErrorCode::Config, "eval needs a blender");
  EvalReport report;
  std::vector<std::pair<const GoldItem*, std::string>> work;
  std::set<std::string> gold_ids;
  for (const GoldItem& g : gold) {
    gold_ids.insert(g.id);
    auto it = config.predictions.find(g.id);
    if (it != config.predictions.end()) {
      work.emplace_back(&g, it->second);
    } else if (config.parser) {
      work.emplace_back(&g, "");
    } else {
      report.missing.push_back(g.id);
    }
  }
  for (const auto& [id, query] : config.predictions) {
    if (!gold_ids.count(id)) report.missing.push_back(id);
  }

  report.records.resize(work.size());
  const auto n = static_cast<std::int64_t>(work.size());
  const int jobs = std::max(1, config.jobs);
#pragma omp parallel for schedule(dynamic) num_threads(jobs) if (jobs > 1)
  for (std::int64_t i = 0; i < n; ++i) {
    EvalRecord& rec = report.records[i];
    const GoldItem& g = *work[i].first;
    rec.id = g.id;
    rec.question = g.question;
    rec.gold_answers = g.answers;
    evaluate(g, work[i].second, config, rec);
  }
  return report;
}

}  // namespace hql::cli
