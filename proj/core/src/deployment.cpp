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

#include "idn/deployment.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "idn/serialize.h"

namespace idn {
namespace {

// Relative slack when comparing objective values.
constexpr double kObjectiveSlack = 1e-12;

bool strictly_less(double a, double b) {
  return a < b - kObjectiveSlack * std::max({1.0, std::abs(a), std::abs(b)});
}

Bytes weight_of(const Assignment& a) { return std::max<Bytes>(a.memory, 1); }

}  // namespace

PlacementBits to_bits(const PlacementProblem& problem, const Placement& placement) {
  PlacementBits bits(problem.assignments.size(), 0);
  for (const auto& [rid, node] : placement) {
    auto it = std::lower_bound(problem.assignments.begin(), problem.assignments.end(),
                               std::make_pair(rid, node), [](const Assignment& a, const auto& key) {
                                 return std::tie(a.realization_id, a.node_id) <
                                        std::tie(key.first, key.second);
                               });
    if (it == problem.assignments.end() || it->realization_id != rid || it->node_id != node) {
      throw IdnError(ErrorCode::kInfeasiblePlacement,
                     "(" + rid + ", " + node + ") is not a valid assignment");
    }
    bits[it - problem.assignments.begin()] = 1;
  }
  return bits;
}

Placement from_bits(const PlacementProblem& problem, const PlacementBits& bits) {
  Placement out;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out.emplace(problem.assignments[i].realization_id, problem.assignments[i].node_id);
  }
  return out;
}

PlacementBits resident_bits(const PlacementProblem& problem) {
  PlacementBits bits(problem.assignments.size(), 0);
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = problem.assignments[i].resident;
  return bits;
}

bool fits(const PlacementProblem& problem, const PlacementBits& bits) {
  std::vector<Bytes> used(problem.nodes.size(), 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) used[problem.assignments[i].node_index] += problem.assignments[i].memory;
  }
  for (std::size_t n = 0; n < used.size(); ++n) {
    if (used[n] > problem.budgets[n]) return false;
  }
  return true;
}

double objective(const PlacementProblem& problem, const PlacementBits& bits) {
  if (!fits(problem, bits)) {
    throw IdnError(ErrorCode::kInfeasiblePlacement, "memory budget exceeded");
  }
  const auto& w = problem.weights;
  double latency = 0.0;
  for (std::size_t c = 0; c < problem.cells.size(); ++c) {
    const double count = problem.cells[c].count;
    if (count == 0.0) continue;
    std::optional<double> best;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (!bits[i]) continue;
      const auto& l = problem.latency[c][i];
      if (l && (!best || *l < *best)) best = l;
    }
    latency += count * (best ? *best : static_cast<double>(w.miss_penalty));
  }
  double deploy = 0.0;
  double net = 0.0;
  double risk = 0.0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (!bits[i]) continue;
    const auto& a = problem.assignments[i];
    if (!a.resident) {
      deploy += a.deploy_cost;
      net += a.net_cost;
    }
    risk += a.risk;
  }
  return latency + w.deploy * deploy + w.network * net + w.risk * risk;
}

double objective(const PlacementProblem& problem, const Placement& placement) {
  return objective(problem, to_bits(problem, placement));
}

namespace {

PlacementBits greedy_bits(const PlacementProblem& problem) {
  PlacementBits bits = resident_bits(problem);
  double current = objective(problem, bits);
  while (true) {
    std::optional<std::size_t> pick;
    double best_ratio = 0.0;
    double best_value = current;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i]) continue;
      bits[i] = 1;
      if (fits(problem, bits)) {
        const double value = objective(problem, bits);
        if (strictly_less(value, current)) {
          const double ratio = (current - value) / static_cast<double>(weight_of(problem.assignments[i]));
          if (!pick || ratio > best_ratio) {
            pick = i;
            best_ratio = ratio;
            best_value = value;
          }
        }
      }
      bits[i] = 0;
    }
    if (!pick) return bits;
    bits[*pick] = 1;
    current = best_value;
  }
}

PlacementBits local_search_bits(const PlacementProblem& problem, PlacementBits bits,
                                int max_rounds) {
  double current = objective(problem, bits);
  const std::size_t n = bits.size();
  for (int round = 0; round < max_rounds; ++round) {
    PlacementBits best_bits;
    double best_value = current;
    auto consider = [&](PlacementBits& candidate) {
      if (!fits(problem, candidate)) return;
      const double value = objective(problem, candidate);
      if (strictly_less(value, best_value)) {
        best_value = value;
        best_bits = candidate;
      }
    };
    for (std::size_t i = 0; i < n; ++i) {  // add or remove one
      bits[i] ^= 1;
      consider(bits);
      bits[i] ^= 1;
    }
    for (std::size_t i = 0; i < n; ++i) {  // swap one out, another in
      if (!bits[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (bits[j]) continue;
        bits[i] = 0;
        bits[j] = 1;
        consider(bits);
        bits[i] = 1;
        bits[j] = 0;
      }
    }
    if (best_bits.empty()) break;
    bits = std::move(best_bits);
    current = best_value;
  }
  return bits;
}

}  // namespace

Placement solve_greedy(const PlacementProblem& problem) {
  return from_bits(problem, greedy_bits(problem));
}

Placement improve_local_search(const PlacementProblem& problem, const Placement& start,
                               int max_rounds) {
  return from_bits(problem, local_search_bits(problem, to_bits(problem, start), max_rounds));
}

Placement solve_exact(const PlacementProblem& problem) {
  const std::size_t size = problem.realizations.size() * problem.nodes.size();
  if (size > kEnumerationBound) {
    throw IdnError(ErrorCode::kInstanceTooLarge,
                   std::to_string(problem.realizations.size()) + " realizations x " +
                       std::to_string(problem.nodes.size()) + " nodes exceeds " +
                       std::to_string(kEnumerationBound));
  }
  const std::size_t n = problem.assignments.size();
  PlacementBits bits(n, 0);
  PlacementBits best_bits;
  double best_value = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (std::size_t i = 0; i < n; ++i) bits[i] = (mask >> i) & 1U;
    if (!fits(problem, bits)) continue;
    const double value = objective(problem, bits);
    if (best_bits.empty() || strictly_less(value, best_value) ||
        (!strictly_less(best_value, value) && bits < best_bits)) {
      best_bits = bits;
      best_value = value;
    }
  }
  return from_bits(problem, best_bits);
}

PlacementProblem build_problem(const ResourceBroker& broker, const Router& router,
                               const std::vector<DemandCell>& cells,
                               const PlacementWeights& weights) {
  const auto& catalog = broker.catalog();
  const auto& topo = broker.topology();
  const auto& repository = router.config().repository;

  PlacementProblem p;
  p.weights = weights;
  p.cells = cells;
  for (const auto& id : broker.node_ids()) {
    const auto& prof = broker.profile(id);
    if (!broker.online(id) || !broker.may_host(prof)) continue;
    p.nodes.push_back(id);
    p.budgets.push_back(prof.capacity.memory_budget);
  }
  for (const auto& [rid, r] : catalog.realizations()) {
    if (!catalog.is_revoked(rid)) p.realizations.push_back(rid);
  }
  for (const auto& rid : p.realizations) {
    const auto& r = catalog.realization(rid);
    const auto& v = catalog.variant(r.variant_id);
    for (std::size_t n = 0; n < p.nodes.size(); ++n) {
      const auto& prof = broker.profile(p.nodes[n]);
      if (prof.hardware.accelerator != r.accelerator || prof.trust < v.security.min_trust ||
          r.memory > p.budgets[n]) {
        continue;
      }
      if (!repository.empty() && !topo.connected(repository, p.nodes[n])) continue;
      Assignment a;
      a.realization_id = rid;
      a.node_id = p.nodes[n];
      a.node_index = n;
      a.memory = r.memory;
      a.resident = std::any_of(prof.state.resident.begin(), prof.state.resident.end(),
                               [&](const Residency& x) {
                                 return x.realization_id == rid && !x.draining;
                               });
      const Micros fetch =
          repository.empty() ? 0 : transfer_time(topo.path(repository, p.nodes[n]), r.artifact_size);
      a.deploy_cost = static_cast<double>(r.load_time) +
                      static_cast<double>(r.artifact_size) * weights.storage_unit_cost;
      a.net_cost = static_cast<double>(fetch);
      a.risk = prof.trust < v.security.preferred_trust ? 1.0 : 0.0;
      a.activation = fetch + r.load_time;
      p.assignments.push_back(std::move(a));
    }
  }

  p.latency.assign(cells.size(), std::vector<std::optional<double>>(p.assignments.size()));
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    if (!catalog.has_class(cell.capability_class)) continue;
    RequestDescriptor q;
    q.request_id = "placement";
    q.capability_class = cell.capability_class;
    q.quality_target = cell.quality_target;
    q.policy = cell.policy;
    q.origin_region = cell.region;
    q.input_tokens = cell.input_tokens;
    q.output_tokens = cell.output_tokens;
    for (std::size_t i = 0; i < p.assignments.size(); ++i) {
      const auto& a = p.assignments[i];
      const auto& r = catalog.realization(a.realization_id);
      if (catalog.class_of(a.realization_id) != cell.capability_class) continue;
      if (!broker.eligible(a.node_id, r, cell.quality_target, cell.policy, cell.region)) continue;
      if (!topo.connected(cell.region, a.node_id)) continue;
      ExecutionPlan plan;
      plan.stages = {{a.node_id, a.realization_id, Phase::kFull}};
      p.latency[c][i] = router.score_static(plan, q).terms.total;
    }
  }
  return p;
}

void DemandWindow::record(const RequestDescriptor& q) {
  while (!samples_.empty() && samples_.front().time < q.arrival_time - window_) {
    samples_.pop_front();
  }
  samples_.push_back({q.arrival_time, q.capability_class, q.origin_region, q.quality_target,
                      q.policy, q.input_tokens, q.output_tokens});
}

std::vector<DemandCell> DemandWindow::cells(Micros now, Micros epoch) const {
  const Micros from = now - window_;
  const Micros span = std::min(window_, now);
  if (span <= 0) return {};

  struct Acc {
    DemandCell cell;
    std::int64_t n = 0;
    TokenCount in = 0;
    TokenCount out = 0;
  };
  std::map<std::string, Acc> groups;
  for (const auto& s : samples_) {
    if (s.time <= from || s.time > now) continue;
    const std::string key = Json::array({s.capability_class, s.region, s.quality_target,
                                         Json(s.policy)})
                                .dump();
    auto& g = groups[key];
    if (g.n == 0) {
      g.cell.capability_class = s.capability_class;
      g.cell.region = s.region;
      g.cell.quality_target = s.quality_target;
      g.cell.policy = s.policy;
    }
    ++g.n;
    g.in += s.input_tokens;
    g.out += s.output_tokens;
  }
  std::vector<DemandCell> out;
  for (auto& [key, g] : groups) {
    g.cell.count = static_cast<double>(g.n) * static_cast<double>(epoch) / static_cast<double>(span);
    g.cell.input_tokens = g.in / g.n;
    g.cell.output_tokens = std::max<TokenCount>(1, g.out / g.n);
    out.push_back(std::move(g.cell));
  }
  return out;
}

PlacementDelta replan(const PlacementProblem& problem, const Placement& pinned, Micros now,
                      int max_rounds) {
  PlacementDelta delta;
  const PlacementBits current = resident_bits(problem);
  delta.objective_before = objective(problem, current);

  PlacementBits bits = local_search_bits(problem, greedy_bits(problem), max_rounds);
  const PlacementBits pinned_bits = [&] {
    PlacementBits b(problem.assignments.size(), 0);
    for (std::size_t i = 0; i < b.size(); ++i) {
      const auto& a = problem.assignments[i];
      b[i] = pinned.count({a.realization_id, a.node_id}) != 0 && a.resident;
    }
    return b;
  }();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (pinned_bits[i]) bits[i] = 1;
  }
  if (!fits(problem, bits)) bits = current;

  // Withdraw anything that no longer pays for itself.
  for (bool changed = true; changed;) {
    changed = false;
    double value = objective(problem, bits);
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (!bits[i] || pinned_bits[i]) continue;
      bits[i] = 0;
      const double without = objective(problem, bits);
      if (!strictly_less(value, without)) {
        value = without;
        changed = true;
      } else {
        bits[i] = 1;
      }
    }
  }

  delta.objective_after = objective(problem, bits);
  delta.target = from_bits(problem, bits);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const auto& a = problem.assignments[i];
    if (bits[i] && !current[i]) {
      delta.loads.push_back({a.realization_id, a.node_id, now + a.activation});
    } else if (!bits[i] && current[i]) {
      delta.evictions.emplace_back(a.realization_id, a.node_id);
    }
  }
  return delta;
}

}  // namespace idn
