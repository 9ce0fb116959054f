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

#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hql/blender.hpp"
#include "hql/ingredients.hpp"
#include "hql/planner.hpp"
#include "hql/storage.hpp"
#include "hql/value.hpp"

namespace hql {

struct TraceEntry {
  StepKind kind = StepKind::FinalQuery;
  std::string ingredient;  // name as written, for ingredient steps
  std::string text;        // SQL, or the replacement text for Substitute
  std::vector<std::string> prompts;
  std::size_t input_rows = 0;
  std::size_t values_passed = 0;
  std::size_t prompt_chars = 0;
  std::size_t model_calls = 0;
  std::string output;  // short summary
  double wall_ms = 0.0;
  std::vector<std::string> notes;
};

struct Totals {
  std::size_t ingredient_calls = 0;
  std::size_t model_calls = 0;
  std::size_t values_passed = 0;
  std::size_t prompt_chars = 0;
};

enum class Outcome : std::uint8_t { Answered, NoResult };
std::string_view to_string(Outcome outcome);

struct Smoothie {
  Table result;
  std::vector<TraceEntry> steps;
  Totals totals;
  Outcome outcome = Outcome::Answered;
  std::string reason;  // why there is no result
  std::string final_sql;

  /// Timings are left out when `timing` is false so output is reproducible.
  nlohmann::json to_json(bool timing = true) const;
};

struct ExecuteOptions {
  bool pushdown = true;
  bool cache = true;
  IngredientConfig ingredients;
  const IngredientRegistry* registry = nullptr;
};

/// Runs a query end to end. Errors during a step are rethrown as
/// ExecutionError; an empty final table or empty context gives NoResult.
/// Session tables are dropped before returning, on every path.
Smoothie execute(const Database& db, const QueryAst& ast, Blender& blender,
                 const ExecuteOptions& options = {});
/// Parses first; SyntaxError propagates unchanged.
Smoothie execute(const Database& db, std::string_view query, Blender& blender,
                 const ExecuteOptions& options = {});

/// Blender wrapper that tallies usage and keeps the prompts it saw.
class CountingBlender : public Blender {
 public:
  explicit CountingBlender(Blender& inner) : inner_(inner) {}
  BlenderResponse complete(const BlenderRequest& request) override;
  std::string name() const override { return inner_.name(); }

  Usage usage() const;
  std::vector<std::string> prompts() const;
  void reset();

 private:
  Blender& inner_;
  mutable std::mutex mu_;
  Usage usage_;
  std::vector<std::string> prompts_;
};

}  // namespace hql
