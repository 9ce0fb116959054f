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

#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hql/ast.hpp"
#include "hql/blender.hpp"
#include "hql/value.hpp"

namespace hql {

inline constexpr const char* kBooleanBatchPattern = "((true|false);)+";
inline constexpr const char* kNumericBatchPattern = "((-?[0-9]+(\\.[0-9]+)?);)+";
inline constexpr const char* kTextBatchPattern = "([^;]*;)+";
inline constexpr const char* kValidatePattern = "(true|false);";

struct IngredientConfig {
  std::size_t batch_size = 5;  // values per Map / Join prompt
  std::size_t cell_cap = 400;  // characters per context cell
  bool strict = false;         // a failed Map batch aborts instead of yielding NULL
  bool parallel = true;        // dispatch batches with OpenMP
  int max_threads = 0;         // 0 = OpenMP default
};

struct MapTask {
  std::string question;
  std::vector<std::string> values;  // distinct, in first-seen order
  OutputHint hint;
  std::vector<std::string> options;  // optional output constraint
};

struct MapResult {
  std::vector<Value> outputs;  // same length and order as values
  Usage usage;
  std::vector<std::string> warnings;
};

struct QaTask {
  std::string question;
  std::optional<Table> context;      // nullopt: question only
  std::vector<std::string> options;  // empty: unconstrained
};

struct QaResult {
  std::string answer;  // canonical option when options are present
  Usage usage;
};

struct JoinTask {
  std::string question;
  std::vector<std::string> left;
  std::vector<std::string> right;
};

struct JoinResult {
  std::vector<std::pair<std::string, std::string>> pairs;  // (left, right)
  std::size_t exact_matches = 0;
  Usage usage;
};

struct ValidateTask {
  std::string claim;
  std::optional<Table> context;
};

struct ValidateResult {
  bool verdict = false;
  Usage usage;
};

/// Prompt for one Map batch.
BlenderRequest map_request(const MapTask& task, const std::vector<std::string>& batch);
BlenderRequest qa_request(const QaTask& task, const IngredientConfig& config = {});
BlenderRequest join_request(const std::string& question, const std::vector<std::string>& candidates,
                            const std::vector<std::string>& options, const std::string& none_token);
BlenderRequest validate_request(const ValidateTask& task, const IngredientConfig& config = {});

/// Map output for one response item: booleans become 1/0; numbers are
/// parsed when the hint asks for a number.
Value coerce_map_output(const std::string& item, const OutputHint& hint);

/// Sentinel for "no match" that is not itself one of `options`.
std::string join_none_token(const std::vector<std::string>& options);

MapResult exec_map(const MapTask& task, Blender& blender, const IngredientConfig& config = {});
/// Throws Error{EmptyContext} when the context has no rows or the option set
/// is empty; Error{ConstraintViolation} after a failed retry.
QaResult exec_qa(const QaTask& task, Blender& blender, const IngredientConfig& config = {});
JoinResult exec_join(const JoinTask& task, Blender& blender, const IngredientConfig& config = {});
ValidateResult exec_validate(const ValidateTask& task, Blender& blender,
                             const IngredientConfig& config = {});

/// Scalar handlers see distinct values and return one output per value.
using ScalarHandler = std::function<std::vector<Value>(
    const std::string& question, const std::vector<std::string>& values, Blender& blender)>;
/// Aggregate handlers see a table subset and return one value.
using AggregateHandler = std::function<Value(const std::string& question, const Table& context,
                                             const std::vector<std::string>& options,
                                             Blender& blender)>;
using CustomHandler = std::variant<ScalarHandler, AggregateHandler>;

/// User-defined ingredients. Register at startup; lookups are thread-safe.
class IngredientRegistry : public CustomNameLookup {
 public:
  /// Throws Error{DuplicateName} for built-in or already registered names and
  /// Error{Config} for invalid identifiers or a handler of the wrong class.
  void register_custom(const std::string& name, CustomClass cls, CustomHandler handler);

  std::optional<CustomClass> lookup(std::string_view name) const override;
  std::optional<CustomHandler> handler(std::string_view name) const;

 private:
  struct Entry {
    std::string name;
    CustomClass cls;
    CustomHandler handler;
  };
  mutable std::shared_mutex mu_;
  std::map<std::string, Entry> entries_;  // keyed by lower-case name
};

bool is_builtin_ingredient(std::string_view name);

}  // namespace hql
