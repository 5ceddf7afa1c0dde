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

// Reusable inference state: per-node stores, benefit-based admission,
// benefit-density eviction, and cooperative migration between nodes.

#pragma once

#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "idn/descriptors.h"
#include "idn/topology.h"

namespace idn {

// Deterministic digest of everything that decides whether a cached state can
// be reused by another request.
std::string compatibility_hash(const RealizationId& realization_id, const std::string& tokenizer,
                               const std::string& decoding_config,
                               const std::string& prefix_digest);

// Cost placed on a state whose scope forbids the target node.
inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

struct BenefitInputs {
  double p_hit = 0.0;
  double delta_latency = 0.0;  // μs saved per hit
  double transfer_cost = 0.0;
  double storage_cost = 0.0;
  double privacy_cost = 0.0;  // kForbidden when the scope disallows the node
};

// Expected saving minus the three costs; -inf when privacy forbids.
double benefit(const BenefitInputs& in);

// Who is asking for, or owns, a piece of state.
struct ScopeKey {
  std::string tenant_id;
  std::string session_id;
  int min_trust = 0;

  bool operator==(const ScopeKey&) const = default;
};

// True when a requester holding `requester` may read an entry owned by
// `owner` under `scope`.
bool scope_authorizes(SharingScope scope, const ScopeKey& owner, const ScopeKey& requester);

// True when an entry with this scope and privacy label may live on a node of
// the given trust.
bool scope_permits_node(SharingScope scope, DataClass privacy, const ScopeKey& owner,
                        int node_trust);

enum class EvictionPolicy { kBenefitDensity, kLru };

struct CacheConfig {
  bool enabled = true;
  Micros reuse_window = 300'000'000;
  double storage_unit_cost = 0.0;  // μs-equivalent per byte per second
  Micros residency_epoch = 60'000'000;
  EvictionPolicy eviction = EvictionPolicy::kBenefitDensity;
};

struct CacheEntry {
  StateDescriptor state;
  NodeId node_id;
  RealizationId realization_id;
  ScopeKey owner;
  TokenCount covered_tokens = 0;
  double delta_latency = 0.0;
  double admission_benefit = 0.0;
  Micros admitted_at = 0;
  Micros last_used = 0;
  std::deque<Micros> hit_times;  // within the reuse window
};

enum class CacheEventKind { kAdmit, kReject, kEvict, kHit, kMiss, kMigrate, kInvalidate };

std::string_view to_string(CacheEventKind kind);

struct CacheEvent {
  Micros time = 0;
  CacheEventKind kind = CacheEventKind::kAdmit;
  NodeId node_id;
  std::string state_id;
  SharingScope scope = SharingScope::kPublic;
  Bytes size = 0;
  double benefit = 0.0;
  std::string reason;
  ScopeKey owner;
  ScopeKey requester;
  Bytes used_after = 0;
  Bytes capacity = 0;
};

struct AdmitResult {
  bool admitted = false;
  std::string reason;  // NegativeBenefit, ScopeViolation, InsufficientSpace, AlreadyResident
  double benefit = 0.0;
  std::vector<std::string> evicted;
};

struct CacheHit {
  std::string state_id;
  NodeId node_id;
  TokenCount covered_tokens = 0;
  std::optional<Bytes> migration_cost;
};

struct MigrationTicket {
  std::string state_id;
  NodeId src;
  NodeId dst;
  Bytes bytes = 0;
  Micros available_at = 0;
};

// One store per node.
class StateStore {
 public:
  StateStore() = default;
  StateStore(NodeId node_id, Bytes capacity) : node_id_(std::move(node_id)), capacity_(capacity) {}

  const NodeId& node_id() const { return node_id_; }
  Bytes capacity() const { return capacity_; }
  Bytes used() const { return used_; }
  Bytes free() const { return capacity_ - used_; }
  const std::map<std::string, CacheEntry>& entries() const { return entries_; }

 private:
  friend class CacheManager;

  NodeId node_id_;
  Bytes capacity_ = 0;
  Bytes used_ = 0;
  std::map<std::string, CacheEntry> entries_;  // by state_id
  std::deque<Micros> lookup_times_;            // within the reuse window
};

// Owns every node store. Not thread-safe; the engine serializes calls.
class CacheManager {
 public:
  explicit CacheManager(CacheConfig config = {}) : config_(config) {}

  const CacheConfig& config() const { return config_; }

  void add_node(const NodeId& node_id, Bytes capacity);
  bool has_node(const NodeId& node_id) const { return stores_.count(node_id) != 0; }
  const StateStore& store(const NodeId& node_id) const;

  // Laplace-smoothed reuse probability over the sliding window.
  double estimate_p_hit(const CacheEntry& entry, Micros now) const;
  ReuseStats reuse_stats(const CacheEntry& entry, Micros now) const;

  // Storage price of holding `size` bytes for one residency epoch.
  double storage_cost(Bytes size) const;

  // Admits `state` at `node_id` when its benefit is positive and its scope
  // permits the node, evicting lower-density entries to make room.
  AdmitResult admit(const NodeId& node_id, int node_trust, StateDescriptor state,
                    const RealizationId& realization_id, const ScopeKey& owner,
                    TokenCount covered_tokens, const BenefitInputs& inputs, Micros now);

  // Reads state matching `hash` at one node and updates reuse counters.
  std::optional<CacheHit> lookup(const NodeId& node_id, const std::string& hash,
                                 const ScopeKey& requester, Micros now);

  // Every authorized entry matching `hash`, across nodes, without touching
  // counters. Ordered by (node_id, state_id).
  std::vector<CacheHit> locate(const std::string& hash, const ScopeKey& requester) const;

  // Current benefit per byte of a resident entry.
  double benefit_density(const CacheEntry& entry, Micros now) const;

  // Frees at least `needed_bytes` at `node_id`. Returns evicted state ids.
  std::vector<std::string> evict_for(const NodeId& node_id, Bytes needed_bytes, Micros now);

  // Drops the session's private entries everywhere.
  std::vector<std::string> session_end(const std::string& session_id, Micros now);

  // Drops entries derived from a realization everywhere.
  std::vector<std::string> invalidate_realization(const RealizationId& realization_id,
                                                  Micros now);

  // Plans a copy of a resident state to another node. The copy is not
  // visible at `dst` until complete_migration runs.
  MigrationTicket migrate(const std::string& state_id, const NodeId& src, const NodeId& dst,
                          int dst_trust, const Topology& topology, Micros now);

  // Installs the migrated copy at its destination, subject to admission.
  AdmitResult complete_migration(const MigrationTicket& ticket, int dst_trust,
                                 const BenefitInputs& inputs, Micros now);

  const std::vector<CacheEvent>& events() const { return events_; }

 private:
  StateStore& store_mut(const NodeId& node_id);
  const CacheEntry* find_entry(const NodeId& node_id, const std::string& state_id) const;
  void prune_window(StateStore& store, Micros now);
  std::vector<std::string> plan_evictions(const StateStore& store, Bytes needed_bytes,
                                          std::optional<double> below_density,
                                          Micros now) const;
  void erase_entry(StateStore& store, const std::string& state_id, CacheEventKind kind,
                   const std::string& reason, Micros now);
  void log(CacheEvent event, const StateStore& store);

  CacheConfig config_;
  std::map<NodeId, StateStore> stores_;
  std::vector<CacheEvent> events_;
};

}  // namespace idn
