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

#include "hql/smoothie.hpp"

namespace hql {

std::string_view to_string(Outcome outcome) {
  return outcome == Outcome::Answered ? "answered" : "no_result";
}

nlohmann::json Smoothie::to_json(bool timing) const {
  nlohmann::json trace = nlohmann::json::array();
  for (const TraceEntry& s : steps) {
    nlohmann::json j;
    j["kind"] = std::string(hql::to_string(s.kind));
    if (!s.ingredient.empty()) j["ingredient"] = s.ingredient;
    j[s.kind == StepKind::Ingredient ? "question" : "sql"] = s.text;
    j["input_rows"] = s.input_rows;
    if (s.kind == StepKind::Ingredient) {
      j["values_passed"] = s.values_passed;
      j["prompt_chars"] = s.prompt_chars;
      j["model_calls"] = s.model_calls;
      j["prompts"] = s.prompts;
    }
    if (!s.output.empty()) j["output"] = s.output;
    if (!s.notes.empty()) j["notes"] = s.notes;
    if (timing) j["wall_ms"] = s.wall_ms;
    trace.push_back(std::move(j));
  }
  nlohmann::json out;
  out["status"] = std::string(hql::to_string(outcome));
  if (!reason.empty()) out["reason"] = reason;
  out["result"] = hql::to_json(result);
  out["final_sql"] = final_sql;
  out["steps"] = std::move(trace);
  out["totals"] = {{"ingredient_calls", totals.ingredient_calls},
                   {"model_calls", totals.model_calls},
                   {"values_passed", totals.values_passed},
                   {"prompt_chars", totals.prompt_chars}};
  return out;
}

}  // namespace hql
