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

// The scenario file: one JSON document carrying topology, catalog, initial
// placement, workload, weights, cache and trust scripts. The committed schema
// lives in docs/scenario.schema.json.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "idn/caching.h"
#include "idn/deployment.h"
#include "idn/descriptors.h"
#include "idn/routing.h"
#include "idn/serialize.h"
#include "idn/topology.h"
#include "idn/trust.h"
#include "idn/workload.h"

namespace idn {

struct PlacementEntry {
  RealizationId realization_id;
  NodeId node_id;
  bool pinned = false;  // never withdrawn by replanning
};

struct PlacementSettings {
  bool enabled = true;
  Micros epoch = 60'000'000;
  Micros window = 300'000'000;
  int max_rounds = 100;
  PlacementWeights weights;
};

struct Revocation {
  RealizationId realization_id;
  Micros at = 0;
};

enum class NodeEventKind { kOffline, kOnline };

struct NodeEvent {
  NodeEventKind kind = NodeEventKind::kOffline;
  NodeId node_id;
  Micros at = 0;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 1;
  Micros duration = 60'000'000;

  std::vector<RegionId> regions;
  std::vector<Domain> domains;
  std::vector<Node> nodes;
  std::vector<Link> links;

  std::vector<CapabilityDescriptor> classes;
  std::vector<CapabilityVariant> variants;
  std::vector<CapabilityRealization> realizations;

  std::vector<PlacementEntry> initial_placement;
  WorkloadSpec workload;
  std::vector<RequestDescriptor> requests;  // scripted, in addition to the workload

  RoutingConfig routing;
  PlacementSettings placement;
  CacheConfig cache;
  Micros session_linger = 30'000'000;  // session end after the last turn

  std::vector<AttestationRecord> attestations;
  std::vector<Revocation> revocations;
  std::vector<NodeEvent> node_events;
};

// Throws IdnError(kParseError) with line and column for malformed text.
Json parse_json_text(const std::string& text);

// Throws IdnError(kScenarioInvalid) naming the field path on shape errors.
Scenario scenario_from_json(const Json& j);

// Referential and invariant checks; empty when the scenario may run.
ValidationResult validate_scenario(const Scenario& s);

// Reads, parses and decodes; does not validate.
Scenario load_scenario(const std::string& path);
std::string read_file(const std::string& path);

}  // namespace idn
