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


// Fixture loading and generators shared by the tests, the acceptance gate
// and the benchmarks.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hql/blender.hpp"
#include "hql/storage.hpp"

namespace hql::testing {

std::string data_dir();
std::string data_path(const std::string& rel);
std::string read_file(const std::string& path);
nlohmann::json read_json(const std::string& path);

struct CorpusEntry {
  std::string name;
  std::string query;
  std::vector<std::string> kinds;  // postorder, as to_string(IngredientKind)
};

/// Reads data/corpus/grammar.sql.
std::vector<CorpusEntry> read_corpus(const std::string& path);

/// Collapses whitespace runs to one space and trims.
std::string squash_ws(std::string_view s);

/// In-memory database built from data/fixtures/<name>/{w.csv,documents.jsonl}.
Database fixture_db(const std::string& name);
std::string fixture_query(const std::string& name);
std::shared_ptr<LookupBlender> fixture_blender(const std::string& name);

/// 1000-row style table `events(id, category, description)` where `rare_every`
/// controls selectivity of category = 'rare' (every n-th row).
void make_events(const Database& db, int rows, int rare_every);

/// Answers every Map item with `answer` and every other task with "true;".
std::shared_ptr<FunctionBlender> constant_blender(std::string answer = "true");

// ---- randomized equivalence cases ----

struct RandomCase {
  std::string setup_sql;      // CREATE/INSERT statements
  std::string query;          // contains at least one ingredient
  nlohmann::json lookup;      // fixture for LookupBlender
};

class CaseGenerator {
 public:
  explicit CaseGenerator(std::uint64_t seed) : rng_(seed) {}
  RandomCase next();

 private:
  int uniform(int lo, int hi);
  std::string predicate(const std::string& q);
  std::string conjunction(const std::string& q, int max_atoms);
  std::mt19937_64 rng_;
};

}  // namespace hql::testing
