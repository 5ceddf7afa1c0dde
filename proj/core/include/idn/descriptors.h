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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace idn {

// Simulation time and sizes are integers everywhere.
using Micros = std::int64_t;
using Bytes = std::int64_t;
using TokenCount = std::int64_t;

using NodeId = std::string;
using DomainId = std::string;
using RegionId = std::string;
using RealizationId = std::string;
using VariantId = std::string;
using ClassName = std::string;

inline constexpr int kMinTrust = 0;
inline constexpr int kMaxTrust = 3;

enum class Tier { kCloud, kRegional, kEdge, kLocal };
enum class LocalityScope { kAny, kRegion, kDomain, kNodeLocal };
enum class DataClass { kPublic, kTenant, kPrivate };
enum class StateType { kArtifact, kPrefix, kTensorState, kResult };
enum class SharingScope { kPublic, kTenantShared, kSessionPrivate, kHardwareBound };
enum class Verdict { kAllowed, kDegraded, kRejected };
enum class Phase { kFull, kPrefill, kDecode };

std::string_view to_string(Tier v);
std::string_view to_string(LocalityScope v);
std::string_view to_string(DataClass v);
std::string_view to_string(StateType v);
std::string_view to_string(SharingScope v);
std::string_view to_string(Verdict v);
std::string_view to_string(Phase v);

// Inverse of to_string; nullopt for unknown spellings.
template <typename E>
std::optional<E> parse_enum(std::string_view text);
template <> std::optional<Tier> parse_enum<Tier>(std::string_view);
template <> std::optional<LocalityScope> parse_enum<LocalityScope>(std::string_view);
template <> std::optional<DataClass> parse_enum<DataClass>(std::string_view);
template <> std::optional<StateType> parse_enum<StateType>(std::string_view);
template <> std::optional<SharingScope> parse_enum<SharingScope>(std::string_view);
template <> std::optional<Verdict> parse_enum<Verdict>(std::string_view);
template <> std::optional<Phase> parse_enum<Phase>(std::string_view);

enum class ErrorCode {
  kUnreachable,
  kDuplicateNode,
  kUnknownDomain,
  kUnknownNode,
  kTrustBelowDomainFloor,
  kInvariantViolation,
  kUnknownCapabilityClass,
  kUnknownRealization,
  kUnknownVariant,
  kInfeasiblePlacement,
  kInstanceTooLarge,
  kHardwareBound,
  kScopeViolation,
  kScenarioInvalid,
  kParseError,
};

std::string_view to_string(ErrorCode code);

class IdnError : public std::runtime_error {
 public:
  IdnError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct PolicyConstraint {
  int min_trust = 0;
  LocalityScope locality_scope = LocalityScope::kAny;
  // Empty means unrestricted.
  std::vector<DomainId> allowed_domains;
  DataClass data_class = DataClass::kPublic;
  // Soft preference; leaving it costs a policy penalty, never feasibility.
  std::optional<DomainId> preferred_domain;

  bool operator==(const PolicyConstraint&) const = default;
};

struct RequestDescriptor {
  std::string request_id;
  ClassName capability_class;
  int quality_target = 1;
  PolicyConstraint policy;
  std::optional<std::string> affinity_token;
  std::optional<double> budget;
  RegionId origin_region;
  TokenCount input_tokens = 0;
  TokenCount output_tokens = 1;
  Micros arrival_time = 0;

  // Workload context used for cache scope keys and prefix reuse.
  bool degradable = false;
  std::string tenant_id;
  std::string session_id;
  TokenCount prefix_tokens = 0;
  std::string prefix_digest;
  std::string decoding_config = "greedy";

  bool operator==(const RequestDescriptor&) const = default;
};

struct SecurityLabel {
  int min_trust = 0;        // mandatory node trust to host
  int preferred_trust = 0;  // below this hosting is allowed but counted as risk
  DataClass data_class = DataClass::kPrivate;  // most sensitive class it may process

  bool operator==(const SecurityLabel&) const = default;
};

struct ResourceRequirement {
  Bytes memory = 0;
  Bytes storage = 0;
  std::string accelerator;
  Micros load_time = 0;

  bool operator==(const ResourceRequirement&) const = default;
};

struct LineageEntry {
  std::string parent_model;
  std::string derivation;

  bool operator==(const LineageEntry&) const = default;
};

struct CapabilityDescriptor {
  ClassName name;
  std::string task;
  int quality = 1;
  Micros latency = 0;  // expected per-request service-time class
  SecurityLabel security;
  ResourceRequirement resource;
  std::vector<LineageEntry> lineage;

  bool operator==(const CapabilityDescriptor&) const = default;
};

struct CapabilityVariant {
  VariantId variant_id;
  ClassName class_name;
  int quality = 1;
  Micros latency_tier = 0;
  SecurityLabel security;

  bool operator==(const CapabilityVariant&) const = default;
};

struct CapabilityRealization {
  RealizationId realization_id;
  VariantId variant_id;
  std::string accelerator;
  Bytes artifact_size = 0;
  Bytes memory = 0;  // resident footprint on a node
  Micros load_time = 0;
  Micros prefill_time_per_token = 1;
  Micros decode_time_per_token = 1;
  Micros setup_time = 0;
  Bytes kv_bytes_per_token = 0;
  std::string tokenizer = "default";

  bool operator==(const CapabilityRealization&) const = default;
};

struct Hardware {
  std::string accelerator;
  double speed_factor = 1.0;
  Bytes memory = 0;
  Bytes storage = 0;

  bool operator==(const Hardware&) const = default;
};

struct Capacity {
  int max_concurrent = 1;
  Bytes memory_budget = 0;
  Bytes state_capacity = 0;  // bytes available to the reusable-state store

  bool operator==(const Capacity&) const = default;
};

struct Residency {
  RealizationId realization_id;
  Micros ready_at = 0;  // loading until this time
  bool draining = false;  // scheduled for eviction once in-flight work ends

  bool operator==(const Residency&) const = default;
};

struct NodeState {
  Micros queued_work = 0;  // wait before a newly reserved stage could start
  std::vector<Residency> resident;
  Bytes free_memory = 0;
  int running = 0;
  int queue_length = 0;

  bool operator==(const NodeState&) const = default;
};

struct Locality {
  RegionId region;
  Tier tier = Tier::kCloud;

  bool operator==(const Locality&) const = default;
};

struct ResourceProfile {
  NodeId node_id;
  DomainId domain_id;
  Hardware hardware;
  std::vector<std::string> runtime;
  Capacity capacity;
  NodeState state;
  Locality locality;
  int trust = 0;

  bool operator==(const ResourceProfile&) const = default;
};

struct ReuseStats {
  std::int64_t lookups = 0;
  std::int64_t hits = 0;

  bool operator==(const ReuseStats&) const = default;
};

struct StateDescriptor {
  std::string state_id;
  StateType state_type = StateType::kPrefix;
  std::string compatibility_hash;
  SharingScope sharing_scope = SharingScope::kPublic;
  Bytes size = 0;
  ReuseStats reuse_stats;
  DataClass privacy_label = DataClass::kPublic;
  std::optional<std::string> decoding_config;
  // nullopt marks the state non-migratable.
  std::optional<Bytes> migration_cost;

  bool operator==(const StateDescriptor&) const = default;
};

struct PlanStage {
  NodeId node_id;
  RealizationId realization_id;
  Phase phase = Phase::kFull;

  bool operator==(const PlanStage&) const = default;
};

struct CapabilityVersion {
  RealizationId realization_id;
  std::string lineage_digest;

  bool operator==(const CapabilityVersion&) const = default;
};

struct NodeAttestation {
  NodeId node_id;
  int trust = 0;
  Micros at = 0;

  bool operator==(const NodeAttestation&) const = default;
};

struct CacheUsage {
  std::vector<std::string> state_ids;
  TokenCount tokens_covered = 0;

  bool operator==(const CacheUsage&) const = default;
};

// The six routing cost terms plus their weighted total.
struct TimingBreakdown {
  Micros t_net = 0;
  Micros t_queue = 0;
  Micros t_exec = 0;
  Micros t_state = 0;
  Micros c_load = 0;
  Micros p_policy = 0;
  double total = 0.0;

  bool operator==(const TimingBreakdown&) const = default;
};

struct ExecutionReceipt {
  std::string request_id;
  std::vector<PlanStage> plan;
  std::vector<CapabilityVersion> capability_versions;
  std::vector<NodeAttestation> node_attestations;
  CacheUsage cache_usage;
  Verdict verdict = Verdict::kAllowed;
  std::string reason;
  TimingBreakdown timing;     // realized
  TimingBreakdown predicted;  // as scored at selection
  Micros arrival_time = 0;
  Micros completion_time = 0;
  Micros ttft = 0;
  Micros tpot = 0;
  int served_quality = 0;

  bool operator==(const ExecutionReceipt&) const = default;
};

struct Violation {
  std::string path;
  std::string message;

  bool operator==(const Violation&) const = default;
};

using ValidationResult = std::vector<Violation>;

ValidationResult validate_descriptor(const PolicyConstraint& d, const std::string& path = "policy");
ValidationResult validate_descriptor(const RequestDescriptor& d, const std::string& path = "request");
ValidationResult validate_descriptor(const CapabilityDescriptor& d, const std::string& path = "capability");
ValidationResult validate_descriptor(const CapabilityVariant& d, const std::string& path = "variant");
ValidationResult validate_descriptor(const CapabilityRealization& d, const std::string& path = "realization");
ValidationResult validate_descriptor(const ResourceProfile& d, const std::string& path = "profile");
ValidationResult validate_descriptor(const StateDescriptor& d, const std::string& path = "state");
ValidationResult validate_descriptor(const ExecutionReceipt& d, const std::string& path = "receipt");

// Rounds up, treating a non-positive divisor as an error by the caller.
inline std::int64_t ceil_div(std::int64_t num, std::int64_t den) {
  return num <= 0 ? 0 : (num + den - 1) / den;
}

// Duration of `tokens` at `per_token` μs each on a node with the given speed
// factor, rounded up to whole microseconds.
Micros scaled_time(TokenCount tokens, Micros per_token, double speed_factor);

}  // namespace idn
