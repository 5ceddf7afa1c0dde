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

#include "idn/registry.h"

#include <algorithm>

#include "idn/digest.h"

namespace idn {

void CapabilityCatalog::add_class(CapabilityDescriptor descriptor) {
  if (auto v = validate_descriptor(descriptor); !v.empty()) {
    throw IdnError(ErrorCode::kInvariantViolation, v.front().path + ": " + v.front().message);
  }
  const auto name = descriptor.name;
  if (!classes_.emplace(name, std::move(descriptor)).second) {
    throw IdnError(ErrorCode::kInvariantViolation, "duplicate capability class '" + name + "'");
  }
}

void CapabilityCatalog::add_variant(CapabilityVariant variant) {
  if (auto v = validate_descriptor(variant); !v.empty()) {
    throw IdnError(ErrorCode::kInvariantViolation, v.front().path + ": " + v.front().message);
  }
  if (!has_class(variant.class_name)) {
    throw IdnError(ErrorCode::kUnknownCapabilityClass, variant.class_name);
  }
  const auto id = variant.variant_id;
  if (!variants_.emplace(id, std::move(variant)).second) {
    throw IdnError(ErrorCode::kInvariantViolation, "duplicate variant '" + id + "'");
  }
}

void CapabilityCatalog::add_realization(CapabilityRealization realization) {
  if (auto v = validate_descriptor(realization); !v.empty()) {
    throw IdnError(ErrorCode::kInvariantViolation, v.front().path + ": " + v.front().message);
  }
  if (!has_variant(realization.variant_id)) {
    throw IdnError(ErrorCode::kUnknownVariant, realization.variant_id);
  }
  const auto id = realization.realization_id;
  if (!realizations_.emplace(id, std::move(realization)).second) {
    throw IdnError(ErrorCode::kInvariantViolation, "duplicate realization '" + id + "'");
  }
}

void CapabilityCatalog::remove_class(const ClassName& name) {
  if (classes_.erase(name) == 0) throw IdnError(ErrorCode::kUnknownCapabilityClass, name);
  std::vector<VariantId> children;
  for (const auto& [id, v] : variants_) {
    if (v.class_name == name) children.push_back(id);
  }
  for (const auto& id : children) remove_variant(id);
}

void CapabilityCatalog::remove_variant(const VariantId& id) {
  if (variants_.erase(id) == 0) throw IdnError(ErrorCode::kUnknownVariant, id);
  for (auto it = realizations_.begin(); it != realizations_.end();) {
    if (it->second.variant_id == id) {
      revoked_.erase(it->first);
      it = realizations_.erase(it);
    } else {
      ++it;
    }
  }
}

void CapabilityCatalog::remove_realization(const RealizationId& id) {
  if (realizations_.erase(id) == 0) throw IdnError(ErrorCode::kUnknownRealization, id);
  revoked_.erase(id);
}

const CapabilityDescriptor& CapabilityCatalog::capability(const ClassName& name) const {
  auto it = classes_.find(name);
  if (it == classes_.end()) throw IdnError(ErrorCode::kUnknownCapabilityClass, name);
  return it->second;
}

const CapabilityVariant& CapabilityCatalog::variant(const VariantId& id) const {
  auto it = variants_.find(id);
  if (it == variants_.end()) throw IdnError(ErrorCode::kUnknownVariant, id);
  return it->second;
}

const CapabilityRealization& CapabilityCatalog::realization(const RealizationId& id) const {
  auto it = realizations_.find(id);
  if (it == realizations_.end()) throw IdnError(ErrorCode::kUnknownRealization, id);
  return it->second;
}

const CapabilityVariant& CapabilityCatalog::variant_of(const RealizationId& id) const {
  return variant(realization(id).variant_id);
}

const ClassName& CapabilityCatalog::class_of(const RealizationId& id) const {
  return variant_of(id).class_name;
}

std::vector<const CapabilityRealization*> CapabilityCatalog::realizations_of_class(
    const ClassName& name) const {
  if (!has_class(name)) throw IdnError(ErrorCode::kUnknownCapabilityClass, name);
  std::vector<const CapabilityRealization*> out;
  for (const auto& [id, r] : realizations_) {
    if (variants_.at(r.variant_id).class_name == name) out.push_back(&r);
  }
  return out;
}

bool CapabilityCatalog::check_integrity() const {
  for (const auto& [id, v] : variants_) {
    if (!has_class(v.class_name)) return false;
  }
  for (const auto& [id, r] : realizations_) {
    if (!has_variant(r.variant_id)) return false;
  }
  return std::all_of(revoked_.begin(), revoked_.end(),
                     [&](const auto& id) { return has_realization(id); });
}

void CapabilityCatalog::mark_revoked(const RealizationId& id) {
  if (!has_realization(id)) throw IdnError(ErrorCode::kUnknownRealization, id);
  revoked_.insert(id);
}

std::string CapabilityCatalog::lineage_digest(const RealizationId& id) const {
  const auto& r = realization(id);
  const auto& v = variant(r.variant_id);
  const auto& c = capability(v.class_name);
  std::string chain;
  for (const auto& e : c.lineage) {
    chain += canonical_digest({e.parent_model, e.derivation});
  }
  return canonical_digest({chain, c.name, v.variant_id, r.realization_id});
}

ResourceBroker::ResourceBroker(const Topology& topology, const CapabilityCatalog& catalog)
    : topology_(topology), catalog_(catalog) {}

void ResourceBroker::register_node(const ResourceProfile& profile) {
  if (has_node(profile.node_id)) throw IdnError(ErrorCode::kDuplicateNode, profile.node_id);
  if (!topology_.has_domain(profile.domain_id)) {
    throw IdnError(ErrorCode::kUnknownDomain, profile.domain_id);
  }
  const auto& domain = topology_.domain(profile.domain_id);
  if (profile.trust < domain.admission_floor) {
    throw IdnError(ErrorCode::kTrustBelowDomainFloor,
                   profile.node_id + " trust " + std::to_string(profile.trust) + " < floor " +
                       std::to_string(domain.admission_floor));
  }
  if (auto v = validate_descriptor(profile); !v.empty()) {
    throw IdnError(ErrorCode::kInvariantViolation, v.front().path + ": " + v.front().message);
  }
  nodes_.emplace(profile.node_id, Entry{profile, true});
  mark_stale(profile.domain_id);
}

void ResourceBroker::remove_node(const NodeId& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw IdnError(ErrorCode::kUnknownNode, id);
  const auto domain = it->second.profile.domain_id;
  nodes_.erase(it);
  mark_stale(domain);
}

void ResourceBroker::update_telemetry(const NodeId& id, const NodeTelemetry& telemetry) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw IdnError(ErrorCode::kUnknownNode, id);
  auto& profile = it->second.profile;
  if (telemetry.queued_work < 0) {
    throw IdnError(ErrorCode::kInvariantViolation, id + ": queued_work < 0");
  }
  if (telemetry.free_memory < 0 || telemetry.free_memory > profile.capacity.memory_budget) {
    throw IdnError(ErrorCode::kInvariantViolation, id + ": free_memory outside [0, budget]");
  }
  Bytes resident_bytes = 0;
  for (const auto& r : telemetry.resident) {
    if (catalog_.has_realization(r.realization_id)) {
      resident_bytes += catalog_.realization(r.realization_id).memory;
    }
  }
  if (resident_bytes > profile.capacity.memory_budget) {
    throw IdnError(ErrorCode::kInvariantViolation, id + ": residents exceed memory budget");
  }
  profile.state.queued_work = telemetry.queued_work;
  profile.state.free_memory = telemetry.free_memory;
  profile.state.resident = telemetry.resident;
  profile.state.running = telemetry.running;
  profile.state.queue_length = telemetry.queue_length;
  mark_stale(profile.domain_id);
}

void ResourceBroker::set_online(const NodeId& id, bool online) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw IdnError(ErrorCode::kUnknownNode, id);
  it->second.online = online;
  mark_stale(it->second.profile.domain_id);
}

void ResourceBroker::set_trust(const NodeId& id, int trust) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw IdnError(ErrorCode::kUnknownNode, id);
  it->second.profile.trust = std::clamp(trust, kMinTrust, kMaxTrust);
  mark_stale(it->second.profile.domain_id);
}

bool ResourceBroker::online(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw IdnError(ErrorCode::kUnknownNode, id);
  return it->second.online;
}

const ResourceProfile& ResourceBroker::profile(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw IdnError(ErrorCode::kUnknownNode, id);
  return it->second.profile;
}

std::vector<NodeId> ResourceBroker::node_ids() const {
  std::vector<NodeId> out;
  out.reserve(nodes_.size());
  for (const auto& [id, e] : nodes_) out.push_back(id);
  return out;
}

void ResourceBroker::mark_stale(const DomainId& domain_id) {
  std::lock_guard<std::mutex> lock(summary_mu_);
  stale_.insert(domain_id);
}

DomainSummary ResourceBroker::summarize(const DomainId& domain_id) const {
  if (!topology_.has_domain(domain_id)) throw IdnError(ErrorCode::kUnknownDomain, domain_id);
  std::lock_guard<std::mutex> lock(summary_mu_);
  auto it = summaries_.find(domain_id);
  if (it == summaries_.end() || stale_.count(domain_id) != 0) {
    summaries_[domain_id] = recompute(domain_id);
    stale_.erase(domain_id);
  }
  return summaries_.at(domain_id);
}

DomainSummary ResourceBroker::recompute(const DomainId& domain_id) const {
  DomainSummary s;
  s.domain_id = domain_id;
  std::int64_t weighted_queue = 0;
  std::int64_t weight = 0;
  for (const auto& [id, e] : nodes_) {
    if (e.profile.domain_id != domain_id || !e.online) continue;
    const auto& p = e.profile;
    ++s.online_nodes;
    s.free_memory += p.state.free_memory;
    s.max_trust = std::max(s.max_trust, p.trust);
    weighted_queue += p.state.queued_work * p.capacity.max_concurrent;
    weight += p.capacity.max_concurrent;
    for (const auto& r : p.state.resident) {
      if (r.draining || !catalog_.has_realization(r.realization_id) ||
          catalog_.is_revoked(r.realization_id)) {
        continue;
      }
      const auto& v = catalog_.variant_of(r.realization_id);
      auto& cs = s.classes[v.class_name];
      cs.best_quality = std::max(cs.best_quality, v.quality);
      ++cs.warm_count;
    }
  }
  s.queue_estimate = weight > 0 ? weighted_queue / weight : 0;
  return s;
}

bool within_locality(const ResourceProfile& node, const PolicyConstraint& policy,
                     const RegionId& origin_region) {
  const auto& allowed = policy.allowed_domains;
  if (!allowed.empty() &&
      std::find(allowed.begin(), allowed.end(), node.domain_id) == allowed.end()) {
    return false;
  }
  switch (policy.locality_scope) {
    case LocalityScope::kAny:
      return true;
    case LocalityScope::kRegion:
      return node.locality.region == origin_region;
    case LocalityScope::kDomain:
      return !allowed.empty();
    case LocalityScope::kNodeLocal:
      return node.locality.tier == Tier::kLocal && node.locality.region == origin_region;
  }
  return false;
}

bool ResourceBroker::eligible(const NodeId& node_id, const CapabilityRealization& realization,
                              int quality_target, const PolicyConstraint& policy,
                              const RegionId& origin_region) const {
  auto it = nodes_.find(node_id);
  if (it == nodes_.end() || !it->second.online) return false;
  const auto& p = it->second.profile;
  if (!may_host(p) || p.trust < policy.min_trust) return false;
  if (!within_locality(p, policy, origin_region)) return false;
  if (catalog_.is_revoked(realization.realization_id)) return false;
  const auto& v = catalog_.variant(realization.variant_id);
  return v.quality >= quality_target && p.trust >= v.security.min_trust &&
         policy.data_class <= v.security.data_class &&
         p.hardware.accelerator == realization.accelerator;
}

std::vector<Candidate> ResourceBroker::lookup_candidates(const ClassName& capability_class,
                                                         int quality_target,
                                                         const PolicyConstraint& policy,
                                                         const RegionId& origin_region) const {
  const auto realizations = catalog_.realizations_of_class(capability_class);
  std::vector<Candidate> out;
  for (const auto& [id, e] : nodes_) {
    const auto& p = e.profile;
    for (const auto* r : realizations) {
      if (!eligible(id, *r, quality_target, policy, origin_region)) continue;
      auto res = std::find_if(p.state.resident.begin(), p.state.resident.end(),
                              [&](const Residency& x) { return x.realization_id == r->realization_id; });
      if (res != p.state.resident.end()) {
        if (!res->draining) out.push_back({id, r->realization_id, true});
      } else if (r->memory <= p.state.free_memory) {
        out.push_back({id, r->realization_id, false});
      }
    }
  }
  return out;
}

}  // namespace idn
