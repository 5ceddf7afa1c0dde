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

#include "idn/descriptors.h"

#include <array>
#include <cmath>
#include <set>
#include <utility>

namespace idn {
namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<Tier, 4> kTierNames{{{Tier::kCloud, "cloud"},
                                         {Tier::kRegional, "regional"},
                                         {Tier::kEdge, "edge"},
                                         {Tier::kLocal, "local"}}};
constexpr NameTable<LocalityScope, 4> kScopeNames{
    {{LocalityScope::kAny, "any"},
     {LocalityScope::kRegion, "region"},
     {LocalityScope::kDomain, "domain"},
     {LocalityScope::kNodeLocal, "node-local"}}};
constexpr NameTable<DataClass, 3> kDataClassNames{{{DataClass::kPublic, "public"},
                                                   {DataClass::kTenant, "tenant"},
                                                   {DataClass::kPrivate, "private"}}};
constexpr NameTable<StateType, 4> kStateTypeNames{
    {{StateType::kArtifact, "artifact"},
     {StateType::kPrefix, "prefix"},
     {StateType::kTensorState, "tensor_state"},
     {StateType::kResult, "result"}}};
constexpr NameTable<SharingScope, 4> kSharingNames{
    {{SharingScope::kPublic, "public"},
     {SharingScope::kTenantShared, "tenant_shared"},
     {SharingScope::kSessionPrivate, "session_private"},
     {SharingScope::kHardwareBound, "hardware_bound"}}};
constexpr NameTable<Verdict, 3> kVerdictNames{{{Verdict::kAllowed, "allowed"},
                                               {Verdict::kDegraded, "degraded"},
                                               {Verdict::kRejected, "rejected"}}};
constexpr NameTable<Phase, 3> kPhaseNames{
    {{Phase::kFull, "full"}, {Phase::kPrefill, "prefill"}, {Phase::kDecode, "decode"}}};

template <typename E, std::size_t N>
std::string_view lookup_name(const NameTable<E, N>& table, E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "?";
}

template <typename E, std::size_t N>
std::optional<E> lookup_value(const NameTable<E, N>& table, std::string_view text) {
  for (const auto& [e, name] : table) {
    if (name == text) return e;
  }
  return std::nullopt;
}

void require(ValidationResult& out, bool ok, const std::string& path,
             const std::string& message) {
  if (!ok) out.push_back({path, message});
}

void append(ValidationResult& out, ValidationResult more) {
  out.insert(out.end(), std::make_move_iterator(more.begin()),
             std::make_move_iterator(more.end()));
}

bool trust_in_range(int t) { return t >= kMinTrust && t <= kMaxTrust; }

ValidationResult validate_security(const SecurityLabel& s, const std::string& path) {
  ValidationResult out;
  require(out, trust_in_range(s.min_trust), path + ".min_trust", "min_trust in [0, 3]");
  require(out, trust_in_range(s.preferred_trust), path + ".preferred_trust",
          "preferred_trust in [0, 3]");
  require(out, s.preferred_trust >= s.min_trust, path + ".preferred_trust",
          "preferred_trust >= min_trust");
  return out;
}

}  // namespace

std::string_view to_string(Tier v) { return lookup_name(kTierNames, v); }
std::string_view to_string(LocalityScope v) { return lookup_name(kScopeNames, v); }
std::string_view to_string(DataClass v) { return lookup_name(kDataClassNames, v); }
std::string_view to_string(StateType v) { return lookup_name(kStateTypeNames, v); }
std::string_view to_string(SharingScope v) { return lookup_name(kSharingNames, v); }
std::string_view to_string(Verdict v) { return lookup_name(kVerdictNames, v); }
std::string_view to_string(Phase v) { return lookup_name(kPhaseNames, v); }

template <>
std::optional<Tier> parse_enum<Tier>(std::string_view t) {
  return lookup_value(kTierNames, t);
}
template <>
std::optional<LocalityScope> parse_enum<LocalityScope>(std::string_view t) {
  return lookup_value(kScopeNames, t);
}
template <>
std::optional<DataClass> parse_enum<DataClass>(std::string_view t) {
  return lookup_value(kDataClassNames, t);
}
template <>
std::optional<StateType> parse_enum<StateType>(std::string_view t) {
  return lookup_value(kStateTypeNames, t);
}
template <>
std::optional<SharingScope> parse_enum<SharingScope>(std::string_view t) {
  return lookup_value(kSharingNames, t);
}
template <>
std::optional<Verdict> parse_enum<Verdict>(std::string_view t) {
  return lookup_value(kVerdictNames, t);
}
template <>
std::optional<Phase> parse_enum<Phase>(std::string_view t) {
  return lookup_value(kPhaseNames, t);
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnreachable: return "Unreachable";
    case ErrorCode::kDuplicateNode: return "DuplicateNode";
    case ErrorCode::kUnknownDomain: return "UnknownDomain";
    case ErrorCode::kUnknownNode: return "UnknownNode";
    case ErrorCode::kTrustBelowDomainFloor: return "TrustBelowDomainFloor";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kUnknownCapabilityClass: return "UnknownCapabilityClass";
    case ErrorCode::kUnknownRealization: return "UnknownRealization";
    case ErrorCode::kUnknownVariant: return "UnknownVariant";
    case ErrorCode::kInfeasiblePlacement: return "InfeasiblePlacement";
    case ErrorCode::kInstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::kHardwareBound: return "HardwareBound";
    case ErrorCode::kScopeViolation: return "ScopeViolation";
    case ErrorCode::kScenarioInvalid: return "ScenarioInvalid";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

Micros scaled_time(TokenCount tokens, Micros per_token, double speed_factor) {
  if (tokens <= 0 || per_token <= 0) return 0;
  const double raw = static_cast<double>(tokens) * static_cast<double>(per_token) / speed_factor;
  return static_cast<Micros>(std::ceil(raw));
}

ValidationResult validate_descriptor(const PolicyConstraint& d, const std::string& path) {
  ValidationResult out;
  require(out, trust_in_range(d.min_trust), path + ".min_trust", "min_trust in [0, 3]");
  require(out, d.locality_scope != LocalityScope::kDomain || !d.allowed_domains.empty(),
          path + ".allowed_domains", "domain scope requires allowed_domains");
  return out;
}

ValidationResult validate_descriptor(const RequestDescriptor& d, const std::string& path) {
  ValidationResult out;
  require(out, !d.request_id.empty(), path + ".request_id", "request_id non-empty");
  require(out, !d.capability_class.empty(), path + ".capability_class",
          "capability_class non-empty");
  require(out, d.quality_target >= 1, path + ".quality_target", "quality_target >= 1");
  require(out, d.input_tokens >= 0, path + ".input_tokens", "input_tokens >= 0");
  require(out, d.output_tokens >= 1, path + ".output_tokens", "output_tokens >= 1");
  require(out, !d.budget || *d.budget >= 0.0, path + ".budget", "budget >= 0");
  require(out, d.arrival_time >= 0, path + ".arrival_time", "arrival_time >= 0");
  require(out, d.prefix_tokens >= 0 && d.prefix_tokens <= d.input_tokens,
          path + ".prefix_tokens", "0 <= prefix_tokens <= input_tokens");
  append(out, validate_descriptor(d.policy, path + ".policy"));
  return out;
}

ValidationResult validate_descriptor(const CapabilityDescriptor& d, const std::string& path) {
  ValidationResult out;
  require(out, !d.name.empty(), path + ".name", "name non-empty");
  require(out, d.quality >= 1, path + ".quality", "quality >= 1");
  require(out, d.latency >= 0, path + ".latency", "latency >= 0");
  require(out, d.resource.memory >= 0, path + ".resource.memory", "memory >= 0");
  require(out, d.resource.storage >= 0, path + ".resource.storage", "storage >= 0");
  require(out, d.resource.load_time >= 0, path + ".resource.load_time", "load_time >= 0");
  require(out, !d.lineage.empty(), path + ".lineage", "lineage non-empty");
  append(out, validate_security(d.security, path + ".security"));
  return out;
}

ValidationResult validate_descriptor(const CapabilityVariant& d, const std::string& path) {
  ValidationResult out;
  require(out, !d.variant_id.empty(), path + ".variant_id", "variant_id non-empty");
  require(out, !d.class_name.empty(), path + ".class_name", "class_name non-empty");
  require(out, d.quality >= 1, path + ".quality", "quality >= 1");
  require(out, d.latency_tier >= 0, path + ".latency_tier", "latency_tier >= 0");
  append(out, validate_security(d.security, path + ".security"));
  return out;
}

ValidationResult validate_descriptor(const CapabilityRealization& d, const std::string& path) {
  ValidationResult out;
  require(out, !d.realization_id.empty(), path + ".realization_id",
          "realization_id non-empty");
  require(out, !d.variant_id.empty(), path + ".variant_id", "variant_id non-empty");
  require(out, d.artifact_size >= 0, path + ".artifact_size", "artifact_size >= 0");
  require(out, d.memory >= 0, path + ".memory", "memory >= 0");
  require(out, d.load_time >= 0, path + ".load_time", "load_time >= 0");
  require(out, d.setup_time >= 0, path + ".setup_time", "setup_time >= 0");
  require(out, d.prefill_time_per_token > 0, path + ".prefill_time_per_token",
          "prefill_time_per_token > 0");
  require(out, d.decode_time_per_token > 0, path + ".decode_time_per_token",
          "decode_time_per_token > 0");
  require(out, d.kv_bytes_per_token >= 0, path + ".kv_bytes_per_token",
          "kv_bytes_per_token >= 0");
  return out;
}

ValidationResult validate_descriptor(const ResourceProfile& d, const std::string& path) {
  ValidationResult out;
  require(out, !d.node_id.empty(), path + ".node_id", "node_id non-empty");
  require(out, !d.domain_id.empty(), path + ".domain_id", "domain_id non-empty");
  require(out, d.hardware.speed_factor > 0.0 && std::isfinite(d.hardware.speed_factor),
          path + ".hardware.speed_factor", "speed_factor > 0");
  require(out, d.hardware.memory >= 0, path + ".hardware.memory", "memory >= 0");
  require(out, d.hardware.storage >= 0, path + ".hardware.storage", "storage >= 0");
  require(out, d.capacity.max_concurrent >= 1, path + ".capacity.max_concurrent",
          "max_concurrent >= 1");
  require(out, d.capacity.memory_budget >= 0, path + ".capacity.memory_budget",
          "memory_budget >= 0");
  require(out, d.capacity.state_capacity >= 0, path + ".capacity.state_capacity",
          "state_capacity >= 0");
  require(out, d.state.queued_work >= 0, path + ".state.queued_work", "queued_work >= 0");
  require(out, d.state.free_memory >= 0 && d.state.free_memory <= d.capacity.memory_budget,
          path + ".state.free_memory", "0 <= free_memory <= memory_budget");
  require(out, trust_in_range(d.trust), path + ".trust", "trust in [0, 3]");
  require(out, !d.locality.region.empty(), path + ".locality.region", "region non-empty");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < d.state.resident.size(); ++i) {
    require(out, seen.insert(d.state.resident[i].realization_id).second,
            path + ".state.resident[" + std::to_string(i) + "]", "resident ids unique");
  }
  return out;
}

ValidationResult validate_descriptor(const StateDescriptor& d, const std::string& path) {
  ValidationResult out;
  require(out, !d.state_id.empty(), path + ".state_id", "state_id non-empty");
  require(out, !d.compatibility_hash.empty(), path + ".compatibility_hash",
          "compatibility_hash non-empty");
  require(out, d.size >= 0, path + ".size", "size >= 0");
  require(out, d.reuse_stats.hits >= 0 && d.reuse_stats.hits <= d.reuse_stats.lookups,
          path + ".reuse_stats", "0 <= hits <= lookups");
  require(out, d.state_type != StateType::kResult || d.decoding_config.has_value(),
          path + ".decoding_config", "result states carry a decoding_config");
  require(out, d.sharing_scope != SharingScope::kHardwareBound || !d.migration_cost,
          path + ".migration_cost", "hardware_bound states are non-migratable");
  require(out, !d.migration_cost || *d.migration_cost >= 0, path + ".migration_cost",
          "migration_cost >= 0");
  return out;
}

ValidationResult validate_descriptor(const ExecutionReceipt& d, const std::string& path) {
  ValidationResult out;
  require(out, !d.request_id.empty(), path + ".request_id", "request_id non-empty");
  const bool served = d.verdict != Verdict::kRejected;
  require(out, served != d.plan.empty(), path + ".plan",
          "served receipts carry a plan; rejected receipts do not");
  require(out, served || !d.reason.empty(), path + ".reason", "rejections carry a reason");
  if (d.plan.size() == 1) {
    require(out, d.plan[0].phase == Phase::kFull, path + ".plan[0].phase",
            "single-stage plans run the full phase");
  } else if (d.plan.size() == 2) {
    require(out, d.plan[0].phase == Phase::kPrefill && d.plan[1].phase == Phase::kDecode,
            path + ".plan", "two-stage plans are (prefill, decode)");
  } else {
    require(out, d.plan.empty(), path + ".plan", "plans have one or two stages");
  }
  return out;
}

}  // namespace idn
