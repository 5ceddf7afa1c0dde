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

// Demand-driven capability placement. A PlacementProblem carries every table
// the objective needs, so the solvers never touch the broker or router and
// can be driven directly by tests.

#pragma once

#include <deque>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "idn/descriptors.h"
#include "idn/registry.h"
#include "idn/routing.h"

namespace idn {

struct DemandCell {
  ClassName capability_class;
  RegionId region;
  int quality_target = 1;
  PolicyConstraint policy;
  double count = 0.0;  // expected requests over one epoch
  TokenCount input_tokens = 0;
  TokenCount output_tokens = 1;
};

struct PlacementWeights {
  double deploy = 1.0;   // λ
  double network = 1.0;  // μ
  double risk = 1.0;     // ν
  double storage_unit_cost = 0.0;
  Micros miss_penalty = 10'000'000;
};

struct Assignment {
  RealizationId realization_id;
  NodeId node_id;
  std::size_t node_index = 0;
  Bytes memory = 0;
  bool resident = false;
  double deploy_cost = 0.0;  // load time plus storage price, charged when new
  double net_cost = 0.0;     // artifact transfer, charged when new
  double risk = 0.0;         // 1 when the node is below the preferred trust
  Micros activation = 0;     // artifact transfer plus load time
};

struct PlacementProblem {
  std::vector<NodeId> nodes;
  std::vector<Bytes> budgets;                // per node index
  std::vector<RealizationId> realizations;   // distinct, sorted
  std::vector<Assignment> assignments;       // sorted by (realization, node)
  std::vector<DemandCell> cells;
  // latency[cell][assignment]: zero-queue plan cost, nullopt when the
  // assignment cannot serve the cell.
  std::vector<std::vector<std::optional<double>>> latency;
  PlacementWeights weights;
};

// Chosen (realization, node) pairs.
using Placement = std::set<std::pair<RealizationId, NodeId>>;

// One flag per problem assignment.
using PlacementBits = std::vector<char>;

PlacementBits to_bits(const PlacementProblem& problem, const Placement& placement);
Placement from_bits(const PlacementProblem& problem, const PlacementBits& bits);
PlacementBits resident_bits(const PlacementProblem& problem);

bool fits(const PlacementProblem& problem, const PlacementBits& bits);

// Throws IdnError(kInfeasiblePlacement) when a node budget is exceeded or a
// pair is not a valid assignment.
double objective(const PlacementProblem& problem, const Placement& placement);
double objective(const PlacementProblem& problem, const PlacementBits& bits);

Placement solve_greedy(const PlacementProblem& problem);
Placement improve_local_search(const PlacementProblem& problem, const Placement& start,
                               int max_rounds);

inline constexpr std::size_t kEnumerationBound = 20;

// Exhaustive search; throws IdnError(kInstanceTooLarge) past the bound.
Placement solve_exact(const PlacementProblem& problem);

// Builds the problem for the broker's current nodes and residency.
PlacementProblem build_problem(const ResourceBroker& broker, const Router& router,
                               const std::vector<DemandCell>& cells,
                               const PlacementWeights& weights);

// Sliding record of arrivals, aggregated into per-epoch demand cells.
class DemandWindow {
 public:
  explicit DemandWindow(Micros window = 300'000'000) : window_(window) {}

  void record(const RequestDescriptor& q);
  std::vector<DemandCell> cells(Micros now, Micros epoch) const;
  Micros window() const { return window_; }

 private:
  struct Sample {
    Micros time;
    ClassName capability_class;
    RegionId region;
    int quality_target;
    PolicyConstraint policy;
    TokenCount input_tokens;
    TokenCount output_tokens;
  };
  Micros window_;
  std::deque<Sample> samples_;
};

struct ScheduledLoad {
  RealizationId realization_id;
  NodeId node_id;
  Micros ready_at = 0;
};

struct PlacementDelta {
  Placement target;
  std::vector<ScheduledLoad> loads;
  std::vector<std::pair<RealizationId, NodeId>> evictions;  // drain, then remove
  double objective_before = 0.0;
  double objective_after = 0.0;

  bool empty() const { return loads.empty() && evictions.empty(); }
};

// Greedy plus local search, then drops every unpinned placement whose
// removal does not raise the objective, and diffs against residency.
PlacementDelta replan(const PlacementProblem& problem, const Placement& pinned, Micros now,
                      int max_rounds = 100);

}  // namespace idn
