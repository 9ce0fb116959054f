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


// Serial vs OpenMP timings for bridge scoring and Map dispatch.

#include <benchmark/benchmark.h>

#include "hql/context_prep.hpp"
#include "hql/ingredients.hpp"
#include "support.hpp"

namespace {

std::vector<hql::BridgeCell> event_cells(int rows) {
  hql::Database db = hql::Database::open_memory();
  hql::testing::make_events(db, rows, 100);
  std::vector<hql::BridgeCell> cells;
  for (const auto& row : db.query("SELECT category, description FROM events").rows) {
    cells.push_back({"events", "category", hql::to_text(row[0])});
    cells.push_back({"events", "description", hql::to_text(row[1])});
  }
  return cells;
}

void BM_ScoreCells(benchmark::State& state) {
  auto cells = event_cells(static_cast<int>(state.range(0)));
  bool parallel = state.range(1) != 0;
  hql::TrigramDice dice;
  const std::string q = "Which rare events in the 4x100 medley relay were team events?";
  for (auto _ : state) {
    benchmark::DoNotOptimize(hql::score_cells(q, cells, dice, hql::kBridgeThreshold, parallel));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cells.size()));
}
BENCHMARK(BM_ScoreCells)->ArgsProduct({{1000, 10000}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_MapDispatch(benchmark::State& state) {
  std::vector<std::string> values;
  for (int i = 0; i < state.range(0); ++i) values.push_back("event " + std::to_string(i));
  auto blender = hql::testing::constant_blender("true");
  hql::IngredientConfig cfg;
  cfg.parallel = state.range(1) != 0;
  hql::MapTask task{"Is this a team event?", values, {hql::HintKind::Boolean, "", hql::kNoNode}, {}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(hql::exec_map(task, *blender, cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MapDispatch)->ArgsProduct({{100, 5000}, {0, 1}});

}  // namespace

BENCHMARK_MAIN();
