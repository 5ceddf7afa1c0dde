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

// Deterministic discrete-event core. Events run in (timestamp, sequence)
// order on one thread; every stage is reserved on its node's FIFO slots at
// selection time, so execution and queueing never exceed what routing priced.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "idn/caching.h"
#include "idn/deployment.h"
#include "idn/metrics.h"
#include "idn/registry.h"
#include "idn/routing.h"
#include "idn/scenario.h"
#include "idn/trust.h"

namespace idn {

enum class EventKind {
  kArrival,
  kDispatch,
  kStageStart,
  kStageComplete,
  kTransferComplete,
  kEpochReplan,
  kSessionEnd,
  kNodeOffline,
  kNodeOnline,
  kRevoke,
  kAttestation,
  kAttestationExpiry,
  kLoadComplete,
  kMigrationComplete,
};

std::string_view to_string(EventKind kind);

// One row of the event trace.
struct TraceRow {
  Micros time = 0;
  std::uint64_t seq = 0;
  std::string kind;
  std::string request_id;
  NodeId node_id;
  std::string detail;
};

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows);

// Everything a routing decision saw, handed to the audit hook before the
// engine acts on it.
struct RouteAudit {
  const RequestDescriptor& request;
  Micros now;
  const Selection& selection;
  const ResourceBroker& broker;
  const CacheManager& cache;
  const Router& router;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<Micros> duration;
  bool trace = false;
  bool cloud_only = false;                 // hosting restricted to cloud nodes
  std::optional<bool> cache_enabled;       // overrides the scenario
  std::optional<RoutingWeights> weights;   // overrides the scenario
  std::function<void(const RouteAudit&)> on_route;
};

struct RunResult {
  MetricsFrame metrics;
  ReceiptLog receipts;
  std::vector<TraceRow> trace;
  std::vector<CacheEvent> cache_events;
  std::vector<RequestDescriptor> requests;  // every arrival, in order
  std::uint64_t seed = 0;
  Micros duration = 0;
};

// Throws IdnError(kScenarioInvalid) listing field paths when the scenario
// does not validate.
RunResult run(const Scenario& scenario, const RunOptions& options = {});

struct OracleReport {
  PlacementProblem problem;
  Placement exact;
  double exact_objective = 0.0;
  Placement heuristic;  // greedy refined by local search
  double heuristic_objective = 0.0;
};

// Placement problem for the demand that arrived up to `at`, priced against
// the initial residency, solved exhaustively and heuristically. Throws
// IdnError(kInstanceTooLarge) past the enumeration bound.
OracleReport oracle_place(const Scenario& scenario, Micros at, const RunOptions& options = {});

}  // namespace idn
