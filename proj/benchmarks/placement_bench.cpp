/* Copyright 2026 The idnsim Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <benchmark/benchmark.h>

#include <random>

#include "idn/deployment.h"

namespace idn {
namespace {

// Every realization can serve every cell from every node at a random cost.
PlacementProblem synthetic(int realizations, int nodes, int cells, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PlacementProblem p;
  for (int n = 0; n < nodes; ++n) {
    p.nodes.push_back("n" + std::to_string(n));
    p.budgets.push_back(40 + static_cast<Bytes>(u(rng) * 60));
  }
  for (int r = 0; r < realizations; ++r) {
    const auto rid = "r" + std::to_string(100 + r);
    p.realizations.push_back(rid);
    const Bytes mem = 5 + static_cast<Bytes>(u(rng) * 30);
    for (int n = 0; n < nodes; ++n) {
      Assignment a;
      a.realization_id = rid;
      a.node_id = p.nodes[n];
      a.node_index = static_cast<std::size_t>(n);
      a.memory = mem;
      a.deploy_cost = u(rng) * 1000;
      a.net_cost = u(rng) * 500;
      p.assignments.push_back(a);
    }
  }
  for (int c = 0; c < cells; ++c) {
    DemandCell cell;
    cell.capability_class = "c" + std::to_string(c);
    cell.count = 1 + u(rng) * 20;
    p.cells.push_back(cell);
    std::vector<std::optional<double>> row;
    for (std::size_t a = 0; a < p.assignments.size(); ++a) {
      if (u(rng) < 0.4) {
        row.push_back(1000 + u(rng) * 9000);
      } else {
        row.push_back(std::nullopt);
      }
    }
    p.latency.push_back(std::move(row));
  }
  p.weights.miss_penalty = 100'000;
  return p;
}

void BM_Greedy(benchmark::State& state) {
  const auto p = synthetic(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 20, 7);
  for (auto _ : state) benchmark::DoNotOptimize(solve_greedy(p));
  state.SetLabel(std::to_string(p.assignments.size()) + " pairs");
}
BENCHMARK(BM_Greedy)->Args({4, 3})->Args({16, 8})->Args({32, 16});

void BM_GreedyPlusLocalSearch(benchmark::State& state) {
  const auto p = synthetic(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 20, 7);
  for (auto _ : state) benchmark::DoNotOptimize(improve_local_search(p, solve_greedy(p), 100));
}
BENCHMARK(BM_GreedyPlusLocalSearch)->Args({4, 3})->Args({16, 8});

void BM_Exact(benchmark::State& state) {
  const auto p = synthetic(4, 3, 20, 7);
  for (auto _ : state) benchmark::DoNotOptimize(solve_exact(p));
}
BENCHMARK(BM_Exact);

}  // namespace
}  // namespace idn
