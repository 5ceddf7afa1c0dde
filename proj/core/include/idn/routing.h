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

// Plan enumeration, six-term scoring and argmin selection with a degradation
// ladder. Scoring is pure over the broker and cache as they stand at `now`.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "idn/caching.h"
#include "idn/descriptors.h"
#include "idn/registry.h"

namespace idn {

struct RoutingWeights {
  double alpha = 1.0;  // network
  double beta = 1.0;   // queueing
  double gamma = 1.0;  // execution
  double delta = 1.0;  // state movement
  double epsilon = 1.0;  // load penalty
  double zeta = 1.0;     // policy penalty

  RoutingWeights scaled(double k) const {
    return {alpha * k, beta * k, gamma * k, delta * k, epsilon * k, zeta * k};
  }
  bool operator==(const RoutingWeights&) const = default;
};

struct RoutingConfig {
  RoutingWeights weights;
  double load_penalty = 0.0;    // κ, scales the summed squared utilization
  double policy_penalty = 0.0;  // charged per soft-preference miss
  double tie_epsilon = 1e-9;
  Bytes bytes_per_token = 4;
  std::optional<int> admission_cap;  // per-node queue length limit
  bool split_enabled = true;
  std::string repository;  // vertex that serves model artifacts
};

struct ExecutionPlan {
  std::vector<PlanStage> stages;
  bool cold = false;  // the single stage must load its realization first
  std::string plan_id;

  bool operator==(const ExecutionPlan&) const = default;
};

// Canonical digest of the stage list, 16 hex characters.
std::string plan_id_of(const std::vector<PlanStage>& stages);

// Timing parts of one stage, in execution order.
struct StageTiming {
  Micros setup = 0;            // including activation or load wait
  Micros prefill = 0;          // uncovered input tokens
  Micros per_output_token = 0; // zero for a prefill-only stage
  TokenCount output_tokens = 0;

  Micros total() const { return setup + prefill + per_output_token * output_tokens; }
};

struct PlanCost {
  TimingBreakdown terms;
  Micros inbound = 0;      // origin to first stage
  Micros kv_transfer = 0;  // between split stages
  Micros response = 0;     // last stage back to origin
  std::vector<StageTiming> stages;

  // Where the reusable prefix state comes from, if anywhere.
  TokenCount covered_tokens = 0;
  std::optional<CacheHit> state_source;
  bool state_local = false;
  bool state_migrate = false;  // otherwise recomputed when not local
};

struct ScoredPlan {
  ExecutionPlan plan;
  PlanCost cost;
};

struct Selection {
  bool served = false;
  ExecutionPlan plan;
  PlanCost cost;
  int quality = 0;
  bool degraded = false;
  std::string reason;  // NoFeasiblePlan, Overloaded, BudgetExceeded
  std::vector<ScoredPlan> considered;
};

// Weighted sum of the six terms.
double weighted_total(const TimingBreakdown& t, const RoutingWeights& w);

// Requester identity for cache scope checks.
ScopeKey scope_key_of(const RequestDescriptor& q);

class Router {
 public:
  Router(const ResourceBroker& broker, const CacheManager* cache, RoutingConfig config);

  const RoutingConfig& config() const { return config_; }
  Router with_weights(const RoutingWeights& weights) const;

  // Every single-stage and split plan at the given quality target, before
  // budget and admission-cap filtering. Sorted by plan_id.
  std::vector<ExecutionPlan> enumerate(const RequestDescriptor& q, int quality_target) const;

  // Plans at the request's own quality whose cost fits its budget.
  std::vector<ExecutionPlan> feasible_plans(const RequestDescriptor& q, Micros now) const;

  PlanCost score(const ExecutionPlan& plan, const RequestDescriptor& q, Micros now) const;

  // Cost with empty queues, no load penalty, no cached state and the stage
  // treated as ready. Used for placement.
  PlanCost score_static(const ExecutionPlan& plan, const RequestDescriptor& q) const;

  Selection select(const RequestDescriptor& q, Micros now) const;

  // True when `a` should win over `b` under the tie rule.
  bool better(const ScoredPlan& a, const ScoredPlan& b) const;

 private:
  PlanCost score_impl(const ExecutionPlan& plan, const RequestDescriptor& q, Micros now,
                      bool live) const;
  bool capped(const ExecutionPlan& plan) const;

  const ResourceBroker* broker_;
  const CacheManager* cache_;
  RoutingConfig config_;
};

}  // namespace idn
