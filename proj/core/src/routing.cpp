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

#include "idn/routing.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "idn/digest.h"

namespace idn {

std::string plan_id_of(const std::vector<PlanStage>& stages) {
  std::string canon;
  for (const auto& s : stages) {
    canon += canonical_digest({s.node_id, s.realization_id, to_string(s.phase)});
  }
  return sha256_hex(canon).substr(0, 16);
}

double weighted_total(const TimingBreakdown& t, const RoutingWeights& w) {
  return w.alpha * static_cast<double>(t.t_net) + w.beta * static_cast<double>(t.t_queue) +
         w.gamma * static_cast<double>(t.t_exec) + w.delta * static_cast<double>(t.t_state) +
         w.epsilon * static_cast<double>(t.c_load) + w.zeta * static_cast<double>(t.p_policy);
}

ScopeKey scope_key_of(const RequestDescriptor& q) {
  return {q.tenant_id, q.session_id, q.policy.min_trust};
}

Router::Router(const ResourceBroker& broker, const CacheManager* cache, RoutingConfig config)
    : broker_(&broker), cache_(cache), config_(std::move(config)) {}

Router Router::with_weights(const RoutingWeights& weights) const {
  Router copy = *this;
  copy.config_.weights = weights;
  return copy;
}

std::vector<ExecutionPlan> Router::enumerate(const RequestDescriptor& q,
                                             int quality_target) const {
  const auto& topo = broker_->topology();
  const auto& catalog = broker_->catalog();
  const auto candidates =
      broker_->lookup_candidates(q.capability_class, quality_target, q.policy, q.origin_region);

  std::vector<ExecutionPlan> plans;
  auto add = [&](std::vector<PlanStage> stages, bool cold) {
    ExecutionPlan p;
    p.plan_id = plan_id_of(stages);
    p.stages = std::move(stages);
    p.cold = cold;
    plans.push_back(std::move(p));
  };

  for (const auto& c : candidates) {
    if (!topo.connected(q.origin_region, c.node_id)) continue;
    if (!c.warm && !config_.repository.empty() && !topo.connected(config_.repository, c.node_id)) {
      continue;
    }
    add({{c.node_id, c.realization_id, Phase::kFull}}, !c.warm);
  }

  if (config_.split_enabled) {
    for (const auto& pre : candidates) {
      if (!pre.warm || !topo.connected(q.origin_region, pre.node_id)) continue;
      const auto& pre_profile = broker_->profile(pre.node_id);
      const auto& variant = catalog.realization(pre.realization_id).variant_id;
      const Micros pre_delay = topo.path(q.origin_region, pre.node_id).delay;
      for (const auto& dec : candidates) {
        if (!dec.warm || dec.node_id == pre.node_id) continue;
        if (catalog.realization(dec.realization_id).variant_id != variant) continue;
        if (!topo.connected(q.origin_region, dec.node_id) ||
            !topo.connected(pre.node_id, dec.node_id)) {
          continue;
        }
        const auto& dec_profile = broker_->profile(dec.node_id);
        if (!(pre_profile.hardware.speed_factor > dec_profile.hardware.speed_factor)) continue;
        if (!(topo.path(q.origin_region, dec.node_id).delay < pre_delay)) continue;
        add({{pre.node_id, pre.realization_id, Phase::kPrefill},
             {dec.node_id, dec.realization_id, Phase::kDecode}},
            false);
      }
    }
  }

  std::sort(plans.begin(), plans.end(),
            [](const ExecutionPlan& a, const ExecutionPlan& b) { return a.plan_id < b.plan_id; });
  return plans;
}

PlanCost Router::score(const ExecutionPlan& plan, const RequestDescriptor& q, Micros now) const {
  return score_impl(plan, q, now, true);
}

PlanCost Router::score_static(const ExecutionPlan& plan, const RequestDescriptor& q) const {
  return score_impl(plan, q, 0, false);
}

PlanCost Router::score_impl(const ExecutionPlan& plan, const RequestDescriptor& q, Micros now,
                            bool live) const {
  const auto& topo = broker_->topology();
  const auto& catalog = broker_->catalog();
  const Bytes bpt = config_.bytes_per_token;
  const auto& first = plan.stages.front();
  const auto& last = plan.stages.back();
  const auto& first_r = catalog.realization(first.realization_id);
  const auto& first_p = broker_->profile(first.node_id);

  PlanCost cost;
  cost.inbound = transfer_time(topo.path(q.origin_region, first.node_id), q.input_tokens * bpt);
  cost.response = transfer_time(topo.path(last.node_id, q.origin_region), q.output_tokens * bpt);
  if (plan.stages.size() == 2) {
    cost.kv_transfer = transfer_time(topo.path(first.node_id, last.node_id),
                                     q.input_tokens * first_r.kv_bytes_per_token);
  }

  // Reusable prefix state for the first stage.
  Micros t_state = 0;
  if (live && cache_ != nullptr && cache_->config().enabled && q.affinity_token &&
      q.prefix_tokens > 0) {
    const auto hash =
        compatibility_hash(first_r.realization_id, first_r.tokenizer, q.decoding_config,
                           q.prefix_digest);
    const auto hits = cache_->locate(hash, scope_key_of(q));
    auto local = std::find_if(hits.begin(), hits.end(),
                              [&](const CacheHit& h) { return h.node_id == first.node_id; });
    if (local != hits.end()) {
      cost.state_source = *local;
      cost.state_local = true;
      cost.covered_tokens = std::min(local->covered_tokens, q.input_tokens);
    } else {
      std::optional<Micros> best;
      for (const auto& h : hits) {
        const TokenCount covered = std::min(h.covered_tokens, q.input_tokens);
        const Micros recompute =
            scaled_time(covered, first_r.prefill_time_per_token, first_p.hardware.speed_factor);
        Micros c = recompute;
        bool migrate = false;
        if (h.migration_cost && topo.connected(h.node_id, first.node_id)) {
          const Micros move = transfer_time(topo.path(h.node_id, first.node_id), *h.migration_cost);
          if (move < recompute) {
            c = move;
            migrate = true;
          }
        }
        if (!best || c < *best) {
          best = c;
          cost.state_source = h;
          cost.state_migrate = migrate;
          cost.covered_tokens = covered;
        }
      }
      if (best) t_state = *best;
    }
  }

  Micros t_exec = 0;
  Micros t_queue = 0;
  double utilization_sq = 0.0;
  int soft_misses = 0;
  for (const auto& s : plan.stages) {
    const auto& r = catalog.realization(s.realization_id);
    const auto& v = catalog.variant(r.variant_id);
    const auto& p = broker_->profile(s.node_id);
    const double speed = p.hardware.speed_factor;

    StageTiming st;
    st.setup = r.setup_time;
    if (plan.cold) {
      const Micros fetch = config_.repository.empty()
                               ? 0
                               : transfer_time(topo.path(config_.repository, s.node_id),
                                               r.artifact_size);
      st.setup += fetch + r.load_time;
    } else if (live) {
      for (const auto& res : p.state.resident) {
        if (res.realization_id == r.realization_id && res.ready_at > now) {
          st.setup += res.ready_at - now;
        }
      }
    }
    if (s.phase != Phase::kDecode) {
      st.prefill = scaled_time(q.input_tokens - cost.covered_tokens, r.prefill_time_per_token, speed);
    }
    if (s.phase != Phase::kPrefill) {
      st.per_output_token = scaled_time(1, r.decode_time_per_token, speed);
      st.output_tokens = q.output_tokens;
    }
    t_exec += st.total();
    cost.stages.push_back(st);

    if (live) {
      t_queue += p.state.queued_work;
      const double u = static_cast<double>(p.state.running + p.state.queue_length) /
                       static_cast<double>(std::max(p.capacity.max_concurrent, 1));
      utilization_sq += u * u;
    }
    if (q.policy.preferred_domain && *q.policy.preferred_domain != p.domain_id) ++soft_misses;
    if (p.trust < v.security.preferred_trust) ++soft_misses;
  }

  auto& t = cost.terms;
  t.t_net = cost.inbound + cost.kv_transfer + cost.response;
  t.t_queue = t_queue;
  t.t_exec = t_exec;
  t.t_state = t_state;
  t.c_load = std::llround(config_.load_penalty * utilization_sq);
  t.p_policy = std::llround(config_.policy_penalty * soft_misses);
  t.total = weighted_total(t, config_.weights);
  return cost;
}

bool Router::capped(const ExecutionPlan& plan) const {
  if (!config_.admission_cap) return false;
  return std::any_of(plan.stages.begin(), plan.stages.end(), [&](const PlanStage& s) {
    return broker_->profile(s.node_id).state.queue_length >= *config_.admission_cap;
  });
}

bool Router::better(const ScoredPlan& a, const ScoredPlan& b) const {
  const double ja = a.cost.terms.total;
  const double jb = b.cost.terms.total;
  const double tol = config_.tie_epsilon * std::max(std::abs(ja), std::abs(jb));
  if (ja < jb - tol) return true;
  if (ja > jb + tol) return false;
  return a.plan.plan_id < b.plan.plan_id;
}

std::vector<ExecutionPlan> Router::feasible_plans(const RequestDescriptor& q, Micros now) const {
  auto plans = enumerate(q, q.quality_target);
  if (q.budget) {
    std::erase_if(plans, [&](const ExecutionPlan& p) {
      return score(p, q, now).terms.total > *q.budget;
    });
  }
  return plans;
}

Selection Router::select(const RequestDescriptor& q, Micros now) const {
  auto attempt = [&](int quality, Selection& out) {
    out.considered.clear();
    out.quality = quality;
    const auto plans = enumerate(q, quality);
    if (plans.empty()) {
      out.reason = "NoFeasiblePlan";
      return false;
    }
    bool any_uncapped = false;
    for (const auto& p : plans) {
      if (capped(p)) continue;
      any_uncapped = true;
      ScoredPlan sp{p, score(p, q, now)};
      if (q.budget && sp.cost.terms.total > *q.budget) continue;
      out.considered.push_back(std::move(sp));
    }
    if (out.considered.empty()) {
      out.reason = any_uncapped ? "BudgetExceeded" : "Overloaded";
      return false;
    }
    const ScoredPlan* best = &out.considered.front();
    for (const auto& sp : out.considered) {
      if (better(sp, *best)) best = &sp;
    }
    out.plan = best->plan;
    out.cost = best->cost;
    out.served = true;
    out.reason.clear();
    return true;
  };

  Selection sel;
  if (attempt(q.quality_target, sel)) return sel;
  if (q.degradable && q.quality_target > 1) {
    Selection degraded;
    if (attempt(q.quality_target - 1, degraded)) {
      degraded.degraded = true;
      return degraded;
    }
    degraded.quality = q.quality_target;
    return degraded;
  }
  return sel;
}

}  // namespace idn
