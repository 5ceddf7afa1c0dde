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

#include "idn/caching.h"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "idn/digest.h"

namespace idn {

std::string compatibility_hash(const RealizationId& realization_id, const std::string& tokenizer,
                               const std::string& decoding_config,
                               const std::string& prefix_digest) {
  return canonical_digest({"compat/v1", realization_id, tokenizer, decoding_config, prefix_digest});
}

double benefit(const BenefitInputs& in) {
  if (std::isinf(in.privacy_cost)) return -std::numeric_limits<double>::infinity();
  return in.p_hit * in.delta_latency - in.transfer_cost - in.storage_cost - in.privacy_cost;
}

bool scope_authorizes(SharingScope scope, const ScopeKey& owner, const ScopeKey& requester) {
  switch (scope) {
    case SharingScope::kPublic:
      return true;
    case SharingScope::kTenantShared:
    case SharingScope::kHardwareBound:
      return owner.tenant_id == requester.tenant_id;
    case SharingScope::kSessionPrivate:
      return owner.tenant_id == requester.tenant_id && owner.session_id == requester.session_id;
  }
  return false;
}

bool scope_permits_node(SharingScope scope, DataClass privacy, const ScopeKey& owner,
                        int node_trust) {
  if (scope == SharingScope::kPublic) return privacy == DataClass::kPublic;
  return node_trust >= owner.min_trust;
}

std::string_view to_string(CacheEventKind kind) {
  switch (kind) {
    case CacheEventKind::kAdmit: return "admit";
    case CacheEventKind::kReject: return "reject";
    case CacheEventKind::kEvict: return "evict";
    case CacheEventKind::kHit: return "hit";
    case CacheEventKind::kMiss: return "miss";
    case CacheEventKind::kMigrate: return "migrate";
    case CacheEventKind::kInvalidate: return "invalidate";
  }
  return "unknown";
}

void CacheManager::add_node(const NodeId& node_id, Bytes capacity) {
  if (capacity < 0) throw IdnError(ErrorCode::kInvariantViolation, node_id + ": capacity < 0");
  if (!stores_.emplace(node_id, StateStore(node_id, capacity)).second) {
    throw IdnError(ErrorCode::kDuplicateNode, node_id);
  }
}

const StateStore& CacheManager::store(const NodeId& node_id) const {
  auto it = stores_.find(node_id);
  if (it == stores_.end()) throw IdnError(ErrorCode::kUnknownNode, node_id);
  return it->second;
}

StateStore& CacheManager::store_mut(const NodeId& node_id) {
  auto it = stores_.find(node_id);
  if (it == stores_.end()) throw IdnError(ErrorCode::kUnknownNode, node_id);
  return it->second;
}

const CacheEntry* CacheManager::find_entry(const NodeId& node_id,
                                           const std::string& state_id) const {
  const auto& entries = store(node_id).entries_;
  auto it = entries.find(state_id);
  return it == entries.end() ? nullptr : &it->second;
}

void CacheManager::prune_window(StateStore& store, Micros now) {
  const Micros horizon = now - config_.reuse_window;
  while (!store.lookup_times_.empty() && store.lookup_times_.front() < horizon) {
    store.lookup_times_.pop_front();
  }
  for (auto& [id, e] : store.entries_) {
    while (!e.hit_times.empty() && e.hit_times.front() < horizon) e.hit_times.pop_front();
  }
}

ReuseStats CacheManager::reuse_stats(const CacheEntry& entry, Micros now) const {
  const Micros from = std::max(entry.admitted_at, now - config_.reuse_window);
  const auto& times = store(entry.node_id).lookup_times_;
  ReuseStats s;
  s.lookups = times.end() - std::lower_bound(times.begin(), times.end(), from);
  s.hits = entry.hit_times.end() -
           std::lower_bound(entry.hit_times.begin(), entry.hit_times.end(), from);
  s.hits = std::min(s.hits, s.lookups);
  return s;
}

double CacheManager::estimate_p_hit(const CacheEntry& entry, Micros now) const {
  const auto s = reuse_stats(entry, now);
  return static_cast<double>(s.hits + 1) / static_cast<double>(s.lookups + 2);
}

double CacheManager::storage_cost(Bytes size) const {
  return static_cast<double>(size) * config_.storage_unit_cost *
         (static_cast<double>(config_.residency_epoch) / 1e6);
}

double CacheManager::benefit_density(const CacheEntry& entry, Micros now) const {
  // Transfer cost is sunk once the entry is resident.
  const double value =
      estimate_p_hit(entry, now) * entry.delta_latency - storage_cost(entry.state.size);
  return value / static_cast<double>(std::max<Bytes>(entry.state.size, 1));
}

std::vector<std::string> CacheManager::plan_evictions(const StateStore& store, Bytes needed_bytes,
                                                      std::optional<double> below_density,
                                                      Micros now) const {
  struct Ranked {
    double key;
    std::string state_id;
    Bytes size;
  };
  std::vector<Ranked> ranked;
  for (const auto& [id, e] : store.entries_) {
    const double density = benefit_density(e, now);
    if (below_density && !(density < *below_density)) continue;
    const double key = config_.eviction == EvictionPolicy::kLru
                           ? static_cast<double>(e.last_used)
                           : density;
    ranked.push_back({key, id, e.state.size});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    return std::tie(a.key, a.state_id) < std::tie(b.key, b.state_id);
  });
  std::vector<std::string> out;
  Bytes free = store.free();
  for (const auto& r : ranked) {
    if (free >= needed_bytes) break;
    out.push_back(r.state_id);
    free += r.size;
  }
  if (free < needed_bytes) out.clear();
  return out;
}

void CacheManager::log(CacheEvent event, const StateStore& store) {
  event.node_id = store.node_id_;
  event.used_after = store.used_;
  event.capacity = store.capacity_;
  events_.push_back(std::move(event));
}

void CacheManager::erase_entry(StateStore& store, const std::string& state_id,
                               CacheEventKind kind, const std::string& reason, Micros now) {
  auto it = store.entries_.find(state_id);
  if (it == store.entries_.end()) return;
  CacheEvent ev;
  ev.time = now;
  ev.kind = kind;
  ev.state_id = state_id;
  ev.scope = it->second.state.sharing_scope;
  ev.size = it->second.state.size;
  ev.reason = reason;
  ev.owner = it->second.owner;
  store.used_ -= it->second.state.size;
  store.entries_.erase(it);
  log(std::move(ev), store);
}

AdmitResult CacheManager::admit(const NodeId& node_id, int node_trust, StateDescriptor state,
                                const RealizationId& realization_id, const ScopeKey& owner,
                                TokenCount covered_tokens, const BenefitInputs& inputs,
                                Micros now) {
  auto& st = store_mut(node_id);
  prune_window(st, now);
  AdmitResult result;
  result.benefit = benefit(inputs);

  auto reject = [&](const char* reason) {
    result.reason = reason;
    CacheEvent ev;
    ev.time = now;
    ev.kind = CacheEventKind::kReject;
    ev.state_id = state.state_id;
    ev.scope = state.sharing_scope;
    ev.size = state.size;
    ev.benefit = result.benefit;
    ev.reason = reason;
    ev.owner = owner;
    log(std::move(ev), st);
    return result;
  };

  for (const auto& [id, e] : st.entries_) {
    if (id == state.state_id ||
        (e.state.compatibility_hash == state.compatibility_hash && e.owner == owner &&
         e.state.sharing_scope == state.sharing_scope)) {
      return reject("AlreadyResident");
    }
  }
  if (!scope_permits_node(state.sharing_scope, state.privacy_label, owner, node_trust)) {
    return reject("ScopeViolation");
  }
  if (!(result.benefit > 0.0)) return reject("NegativeBenefit");
  if (state.size > st.capacity_) return reject("InsufficientSpace");

  const double density = result.benefit / static_cast<double>(std::max<Bytes>(state.size, 1));
  if (st.free() < state.size) {
    auto victims = plan_evictions(
        st, state.size,
        config_.eviction == EvictionPolicy::kBenefitDensity ? std::optional<double>(density)
                                                            : std::nullopt,
        now);
    if (victims.empty()) return reject("InsufficientSpace");
    for (const auto& id : victims) erase_entry(st, id, CacheEventKind::kEvict, "Capacity", now);
    result.evicted = std::move(victims);
  }

  CacheEntry entry;
  entry.state = std::move(state);
  entry.node_id = node_id;
  entry.realization_id = realization_id;
  entry.owner = owner;
  entry.covered_tokens = covered_tokens;
  entry.delta_latency = inputs.delta_latency;
  entry.admission_benefit = result.benefit;
  entry.admitted_at = now;
  entry.last_used = now;
  const auto id = entry.state.state_id;
  st.used_ += entry.state.size;

  CacheEvent ev;
  ev.time = now;
  ev.kind = CacheEventKind::kAdmit;
  ev.state_id = id;
  ev.scope = entry.state.sharing_scope;
  ev.size = entry.state.size;
  ev.benefit = result.benefit;
  ev.owner = owner;
  st.entries_.emplace(id, std::move(entry));
  log(std::move(ev), st);
  result.admitted = true;
  return result;
}

std::optional<CacheHit> CacheManager::lookup(const NodeId& node_id, const std::string& hash,
                                             const ScopeKey& requester, Micros now) {
  auto& st = store_mut(node_id);
  prune_window(st, now);
  st.lookup_times_.push_back(now);
  for (auto& [id, e] : st.entries_) {
    if (e.state.compatibility_hash != hash) continue;
    if (!scope_authorizes(e.state.sharing_scope, e.owner, requester)) continue;
    e.hit_times.push_back(now);
    e.last_used = now;
    CacheEvent ev;
    ev.time = now;
    ev.kind = CacheEventKind::kHit;
    ev.state_id = id;
    ev.scope = e.state.sharing_scope;
    ev.size = e.state.size;
    ev.owner = e.owner;
    ev.requester = requester;
    log(std::move(ev), st);
    return CacheHit{id, node_id, e.covered_tokens, e.state.migration_cost};
  }
  CacheEvent ev;
  ev.time = now;
  ev.kind = CacheEventKind::kMiss;
  ev.requester = requester;
  log(std::move(ev), st);
  return std::nullopt;
}

std::vector<CacheHit> CacheManager::locate(const std::string& hash,
                                           const ScopeKey& requester) const {
  std::vector<CacheHit> out;
  for (const auto& [node, st] : stores_) {
    for (const auto& [id, e] : st.entries_) {
      if (e.state.compatibility_hash == hash &&
          scope_authorizes(e.state.sharing_scope, e.owner, requester)) {
        out.push_back({id, node, e.covered_tokens, e.state.migration_cost});
      }
    }
  }
  return out;
}

std::vector<std::string> CacheManager::evict_for(const NodeId& node_id, Bytes needed_bytes,
                                                 Micros now) {
  auto& st = store_mut(node_id);
  if (needed_bytes > st.capacity_) {
    throw IdnError(ErrorCode::kInvariantViolation, node_id + ": request exceeds store capacity");
  }
  prune_window(st, now);
  auto victims = plan_evictions(st, needed_bytes, std::nullopt, now);
  for (const auto& id : victims) erase_entry(st, id, CacheEventKind::kEvict, "Capacity", now);
  return victims;
}

std::vector<std::string> CacheManager::session_end(const std::string& session_id, Micros now) {
  std::vector<std::string> out;
  for (auto& [node, st] : stores_) {
    std::vector<std::string> doomed;
    for (const auto& [id, e] : st.entries_) {
      if (e.state.sharing_scope == SharingScope::kSessionPrivate &&
          e.owner.session_id == session_id) {
        doomed.push_back(id);
      }
    }
    for (const auto& id : doomed) {
      erase_entry(st, id, CacheEventKind::kEvict, "SessionEnd", now);
      out.push_back(id);
    }
  }
  return out;
}

std::vector<std::string> CacheManager::invalidate_realization(const RealizationId& realization_id,
                                                              Micros now) {
  std::vector<std::string> out;
  for (auto& [node, st] : stores_) {
    std::vector<std::string> doomed;
    for (const auto& [id, e] : st.entries_) {
      if (e.realization_id == realization_id) doomed.push_back(id);
    }
    for (const auto& id : doomed) {
      erase_entry(st, id, CacheEventKind::kInvalidate, "LineageRevoked", now);
      out.push_back(id);
    }
  }
  return out;
}

MigrationTicket CacheManager::migrate(const std::string& state_id, const NodeId& src,
                                      const NodeId& dst, int dst_trust,
                                      const Topology& topology, Micros now) {
  const CacheEntry* e = find_entry(src, state_id);
  if (e == nullptr) {
    throw IdnError(ErrorCode::kInvariantViolation, state_id + " not resident at " + src);
  }
  if (!has_node(dst)) throw IdnError(ErrorCode::kUnknownNode, dst);
  if (e->state.sharing_scope == SharingScope::kHardwareBound || !e->state.migration_cost) {
    throw IdnError(ErrorCode::kHardwareBound, state_id);
  }
  if (!scope_permits_node(e->state.sharing_scope, e->state.privacy_label, e->owner, dst_trust)) {
    throw IdnError(ErrorCode::kScopeViolation, state_id + " may not move to " + dst);
  }
  MigrationTicket t;
  t.state_id = state_id;
  t.src = src;
  t.dst = dst;
  t.bytes = *e->state.migration_cost;
  t.available_at = now + transfer_time(topology.path(src, dst), t.bytes);

  CacheEvent ev;
  ev.time = now;
  ev.kind = CacheEventKind::kMigrate;
  ev.state_id = state_id;
  ev.scope = e->state.sharing_scope;
  ev.size = t.bytes;
  ev.reason = "to " + dst;
  ev.owner = e->owner;
  log(std::move(ev), store(src));
  return t;
}

AdmitResult CacheManager::complete_migration(const MigrationTicket& ticket, int dst_trust,
                                             const BenefitInputs& inputs, Micros now) {
  const CacheEntry* e = find_entry(ticket.src, ticket.state_id);
  if (e == nullptr) {
    AdmitResult r;
    r.reason = "SourceEvicted";
    return r;
  }
  // Copy before admit can touch the source store's map.
  const CacheEntry src = *e;
  return admit(ticket.dst, dst_trust, src.state, src.realization_id, src.owner,
               src.covered_tokens, inputs, now);
}

}  // namespace idn
