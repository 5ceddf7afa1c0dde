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

#include <memory>

#include "idn/routing.h"
#include "idn/scenario.h"

namespace idn {
namespace {

// Broker and router over a shipped scenario with its initial placement warm.
struct Fleet {
  explicit Fleet(const Scenario& s) : topology(s.regions, s.nodes, s.domains, s.links) {
    for (const auto& c : s.classes) catalog.add_class(c);
    for (const auto& v : s.variants) catalog.add_variant(v);
    for (const auto& r : s.realizations) catalog.add_realization(r);
    broker = std::make_unique<ResourceBroker>(topology, catalog);
    for (const auto& n : s.nodes) {
      broker->register_node(n.profile);
      cache.add_node(n.node_id, n.profile.capacity.state_capacity);
      NodeTelemetry t;
      t.free_memory = n.profile.capacity.memory_budget;
      for (const auto& e : s.initial_placement) {
        if (e.node_id == n.node_id) t.resident.push_back({e.realization_id, 0, false});
      }
      broker->update_telemetry(n.node_id, t);
    }
    router = std::make_unique<Router>(*broker, &cache, s.routing);
  }

  Topology topology;
  CapabilityCatalog catalog;
  std::unique_ptr<ResourceBroker> broker;
  CacheManager cache;
  std::unique_ptr<Router> router;
};

RequestDescriptor chat_request(const RegionId& origin) {
  RequestDescriptor q;
  q.request_id = "bench";
  q.capability_class = "chat";
  q.origin_region = origin;
  q.input_tokens = 400;
  q.output_tokens = 60;
  q.policy.min_trust = 1;
  q.policy.data_class = DataClass::kTenant;
  q.tenant_id = "t";
  q.session_id = "s";
  return q;
}

void BM_Select(benchmark::State& state) {
  const Fleet f(load_scenario(IDN_SCENARIO_DIR "/locality.json"));
  const auto q = chat_request("east");
  for (auto _ : state) benchmark::DoNotOptimize(f.router->select(q, 0));
}
BENCHMARK(BM_Select);

void BM_Enumerate(benchmark::State& state) {
  const Fleet f(load_scenario(IDN_SCENARIO_DIR "/locality.json"));
  const auto q = chat_request("west");
  for (auto _ : state) benchmark::DoNotOptimize(f.router->enumerate(q, 1));
}
BENCHMARK(BM_Enumerate);

}  // namespace
}  // namespace idn
