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

#include "hql/cli.hpp"

namespace hql::cli {

nlohmann::json SavingsReport::to_json() const {
  return {{"unit", "characters"},
          {"prompt_chars", prompt_chars},
          {"baseline_prompt_chars", baseline_prompt_chars},
          {"values_passed", values_passed},
          {"baseline_values_passed", baseline_values_passed},
          {"reduction", reduction},
          {"reduction_percent", reduction * 100.0}};
}

// The baseline runs the same query with push-down off, so every ingredient
// sees its whole input column or context.
SavingsReport cmd_savings(const Database& db, const std::string& query, Blender& blender,
                          const ExecuteOptions& options) {
  ExecuteOptions on = options;
  on.pushdown = true;
  ExecuteOptions off = options;
  off.pushdown = false;
  Smoothie optimized = execute(db, query, blender, on);
  Smoothie baseline = execute(db, query, blender, off);

  SavingsReport r;
  r.prompt_chars = optimized.totals.prompt_chars;
  r.values_passed = optimized.totals.values_passed;
  r.baseline_prompt_chars = baseline.totals.prompt_chars;
  r.baseline_values_passed = baseline.totals.values_passed;
  r.reduction = r.baseline_prompt_chars == 0
                    ? 1.0
                    : 1.0 - static_cast<double>(r.prompt_chars) / static_cast<double>(r.baseline_prompt_chars);
  return r;
}

}  // namespace hql::cli
