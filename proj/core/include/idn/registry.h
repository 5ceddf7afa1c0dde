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

#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "idn/descriptors.h"
#include "idn/topology.h"

namespace idn {

// Three-level store: classes -> variants -> realizations. Removing a parent
// cascades to its children so no entry ever dangles.
class CapabilityCatalog {
 public:
  void add_class(CapabilityDescriptor descriptor);
  void add_variant(CapabilityVariant variant);
  void add_realization(CapabilityRealization realization);

  void remove_class(const ClassName& name);
  void remove_variant(const VariantId& id);
  void remove_realization(const RealizationId& id);

  bool has_class(const ClassName& name) const { return classes_.count(name) != 0; }
  bool has_variant(const VariantId& id) const { return variants_.count(id) != 0; }
  bool has_realization(const RealizationId& id) const { return realizations_.count(id) != 0; }

  const CapabilityDescriptor& capability(const ClassName& name) const;
  const CapabilityVariant& variant(const VariantId& id) const;
  const CapabilityRealization& realization(const RealizationId& id) const;
  const CapabilityVariant& variant_of(const RealizationId& id) const;
  const ClassName& class_of(const RealizationId& id) const;

  // Sorted by realization id.
  std::vector<const CapabilityRealization*> realizations_of_class(const ClassName& name) const;

  const std::map<ClassName, CapabilityDescriptor>& classes() const { return classes_; }
  const std::map<VariantId, CapabilityVariant>& variants() const { return variants_; }
  const std::map<RealizationId, CapabilityRealization>& realizations() const {
    return realizations_;
  }

  // True when every variant names an existing class and every realization an
  // existing variant.
  bool check_integrity() const;

  void mark_revoked(const RealizationId& id);
  bool is_revoked(const RealizationId& id) const { return revoked_.count(id) != 0; }

  // Digest over the class lineage chain plus the variant and realization ids.
  std::string lineage_digest(const RealizationId& id) const;

 private:
  std::map<ClassName, CapabilityDescriptor> classes_;
  std::map<VariantId, CapabilityVariant> variants_;
  std::map<RealizationId, CapabilityRealization> realizations_;
  std::set<RealizationId> revoked_;
};

struct NodeTelemetry {
  Micros queued_work = 0;
  Bytes free_memory = 0;
  std::vector<Residency> resident;
  int running = 0;
  int queue_length = 0;
};

struct ClassSummary {
  int best_quality = 0;
  int warm_count = 0;

  bool operator==(const ClassSummary&) const = default;
};

struct DomainSummary {
  DomainId domain_id;
  std::map<ClassName, ClassSummary> classes;
  Bytes free_memory = 0;
  Micros queue_estimate = 0;
  int max_trust = 0;
  int online_nodes = 0;

  bool operator==(const DomainSummary&) const = default;
};

struct Candidate {
  NodeId node_id;
  RealizationId realization_id;
  bool warm = false;

  bool operator==(const Candidate&) const = default;
  auto operator<=>(const Candidate&) const = default;
};

// Returns true for nodes allowed to host work; used for the cloud-only
// baseline.
using HostFilter = std::function<bool(const ResourceProfile&)>;

// Admits nodes, keeps their live profiles, and answers aggregated queries.
// Mutations must be serialized by the caller; summaries are recomputed lazily
// on read and are safe to read concurrently.
class ResourceBroker {
 public:
  ResourceBroker(const Topology& topology, const CapabilityCatalog& catalog);

  ResourceBroker(const ResourceBroker&) = delete;
  ResourceBroker& operator=(const ResourceBroker&) = delete;

  void register_node(const ResourceProfile& profile);
  void remove_node(const NodeId& id);
  void update_telemetry(const NodeId& id, const NodeTelemetry& telemetry);
  void set_online(const NodeId& id, bool online);
  void set_trust(const NodeId& id, int trust);
  void set_host_filter(HostFilter filter) { host_filter_ = std::move(filter); }

  bool has_node(const NodeId& id) const { return nodes_.count(id) != 0; }
  bool online(const NodeId& id) const;
  const ResourceProfile& profile(const NodeId& id) const;
  std::vector<NodeId> node_ids() const;
  bool may_host(const ResourceProfile& profile) const {
    return !host_filter_ || host_filter_(profile);
  }

  DomainSummary summarize(const DomainId& domain_id) const;

  // Whether `node_id` may serve `realization` for a request with this quality
  // target, policy and origin, ignoring residency and free memory.
  bool eligible(const NodeId& node_id, const CapabilityRealization& realization,
                int quality_target, const PolicyConstraint& policy,
                const RegionId& origin_region) const;

  // Every (node, realization) pair that satisfies quality, trust, locality,
  // domain and accelerator constraints. Warm pairs are resident; cold pairs
  // fit in the node's free memory today.
  std::vector<Candidate> lookup_candidates(const ClassName& capability_class, int quality_target,
                                           const PolicyConstraint& policy,
                                           const RegionId& origin_region) const;

  const Topology& topology() const { return topology_; }
  const CapabilityCatalog& catalog() const { return catalog_; }

 private:
  struct Entry {
    ResourceProfile profile;
    bool online = true;
  };

  void mark_stale(const DomainId& domain_id);
  DomainSummary recompute(const DomainId& domain_id) const;

  const Topology& topology_;
  const CapabilityCatalog& catalog_;
  std::map<NodeId, Entry> nodes_;
  HostFilter host_filter_;

  mutable std::mutex summary_mu_;
  mutable std::map<DomainId, DomainSummary> summaries_;
  mutable std::set<DomainId> stale_;
};

// Locality scope and allowed-domain check for one node.
bool within_locality(const ResourceProfile& node, const PolicyConstraint& policy,
                     const RegionId& origin_region);

}  // namespace idn
