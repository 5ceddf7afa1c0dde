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

#include "fixtures.h"

namespace idn::testing {

std::string scenario_path(const std::string& name) {
  return std::string(IDN_SCENARIO_DIR) + "/" + name + ".json";
}

Scenario load_named(const std::string& name) { return load_scenario(scenario_path(name)); }

World::World(const Scenario& s)
    : topology(s.regions, s.nodes, s.domains, s.links), routing(s.routing) {
  for (const auto& c : s.classes) catalog.add_class(c);
  for (const auto& v : s.variants) catalog.add_variant(v);
  for (const auto& r : s.realizations) catalog.add_realization(r);
  broker = std::make_unique<ResourceBroker>(topology, catalog);
  for (const auto& n : s.nodes) {
    ResourceProfile p = n.profile;
    p.state = NodeState{};
    p.state.free_memory = p.capacity.memory_budget;
    broker->register_node(p);
    if (!n.online) broker->set_online(n.node_id, false);
  }
  for (const auto& n : s.nodes) {
    NodeTelemetry t;
    t.free_memory = n.profile.capacity.memory_budget;
    for (const auto& e : s.initial_placement) {
      if (e.node_id != n.node_id) continue;
      t.resident.push_back({e.realization_id, 0, false});
      t.free_memory -= catalog.realization(e.realization_id).memory;
    }
    broker->update_telemetry(n.node_id, t);
  }
}

ResourceProfile make_profile(const NodeId& id, const DomainId& domain, const RegionId& region,
                             Tier tier, const std::string& accelerator, double speed,
                             int max_concurrent, Bytes memory, int trust) {
  ResourceProfile p;
  p.node_id = id;
  p.domain_id = domain;
  p.hardware.accelerator = accelerator;
  p.hardware.speed_factor = speed;
  p.hardware.memory = memory;
  p.capacity.max_concurrent = max_concurrent;
  p.capacity.memory_budget = memory;
  p.capacity.state_capacity = memory / 4;
  p.state.free_memory = memory;
  p.locality.region = region;
  p.locality.tier = tier;
  p.trust = trust;
  return p;
}

CapabilityRealization make_realization(const RealizationId& id, const VariantId& variant,
                                       const std::string& accelerator, Bytes memory,
                                       Micros prefill, Micros decode) {
  CapabilityRealization r;
  r.realization_id = id;
  r.variant_id = variant;
  r.accelerator = accelerator;
  r.memory = memory;
  r.artifact_size = memory / 2;
  r.prefill_time_per_token = prefill;
  r.decode_time_per_token = decode;
  return r;
}

Link make_link(const std::string& id, const std::string& a, const std::string& b, Micros delay,
               Bytes bandwidth, bool core) {
  return Link{id, a, b, delay, bandwidth, core};
}

}  // namespace idn::testing
