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

#pragma once

#include <memory>
#include <string>

#include "idn/registry.h"
#include "idn/routing.h"
#include "idn/scenario.h"
#include "idn/topology.h"

namespace idn::testing {

// Path of a shipped scenario file, e.g. scenario_path("example").
std::string scenario_path(const std::string& name);
Scenario load_named(const std::string& name);

// Topology, catalog and broker built from a scenario with its initial
// placement pushed as telemetry. Not movable: the broker keeps references.
struct World {
  explicit World(const Scenario& s);
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  Topology topology;
  CapabilityCatalog catalog;
  std::unique_ptr<ResourceBroker> broker;
  RoutingConfig routing;
};

ResourceProfile make_profile(const NodeId& id, const DomainId& domain, const RegionId& region,
                             Tier tier, const std::string& accelerator, double speed,
                             int max_concurrent, Bytes memory, int trust);

CapabilityRealization make_realization(const RealizationId& id, const VariantId& variant,
                                       const std::string& accelerator, Bytes memory,
                                       Micros prefill, Micros decode);

Link make_link(const std::string& id, const std::string& a, const std::string& b, Micros delay,
               Bytes bandwidth, bool core = false);

}  // namespace idn::testing
