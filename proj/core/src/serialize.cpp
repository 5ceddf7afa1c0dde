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

#include "idn/serialize.h"

#include <charconv>
#include <cmath>
#include <limits>

namespace idn {
namespace {

template <typename E>
void decode_enum(const Json& j, const std::string& path, E& out, const char* what) {
  if (!j.is_string()) fail_field(path, std::string("expected ") + what + " name");
  auto parsed = parse_enum<E>(j.get<std::string>());
  if (!parsed) fail_field(path, "unknown " + std::string(what) + " '" + j.get<std::string>() + "'");
  out = *parsed;
}

template <typename E>
std::string name(E e) {
  return std::string(to_string(e));
}

template <typename T>
void put_optional(Json& j, const char* key, const std::optional<T>& v) {
  if (v) {
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

}  // namespace

[[noreturn]] void fail_field(const std::string& path, const std::string& message) {
  throw IdnError(ErrorCode::kScenarioInvalid, path + ": " + message);
}

JsonReader::JsonReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) fail_field(path_, "expected object");
}

void JsonReader::fail_missing(const char* key) const {
  fail_field(path_of(key), "missing required field");
}

void decode(const Json& j, const std::string& path, std::string& out) {
  if (!j.is_string()) fail_field(path, "expected string");
  out = j.get<std::string>();
}

void decode(const Json& j, const std::string& path, std::int64_t& out) {
  if (!j.is_number_integer()) fail_field(path, "expected integer");
  out = j.get<std::int64_t>();
}

void decode(const Json& j, const std::string& path, int& out) {
  if (!j.is_number_integer()) fail_field(path, "expected integer");
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    fail_field(path, "integer out of range");
  }
  out = static_cast<int>(v);
}

void decode(const Json& j, const std::string& path, double& out) {
  if (!j.is_number()) fail_field(path, "expected number");
  out = j.get<double>();
  if (!std::isfinite(out)) fail_field(path, "expected finite number");
}

void decode(const Json& j, const std::string& path, bool& out) {
  if (!j.is_boolean()) fail_field(path, "expected boolean");
  out = j.get<bool>();
}

void decode(const Json& j, const std::string& p, Tier& out) { decode_enum(j, p, out, "tier"); }
void decode(const Json& j, const std::string& p, LocalityScope& out) {
  decode_enum(j, p, out, "locality scope");
}
void decode(const Json& j, const std::string& p, DataClass& out) {
  decode_enum(j, p, out, "data class");
}
void decode(const Json& j, const std::string& p, StateType& out) {
  decode_enum(j, p, out, "state type");
}
void decode(const Json& j, const std::string& p, SharingScope& out) {
  decode_enum(j, p, out, "sharing scope");
}
void decode(const Json& j, const std::string& p, Verdict& out) {
  decode_enum(j, p, out, "verdict");
}
void decode(const Json& j, const std::string& p, Phase& out) { decode_enum(j, p, out, "phase"); }

void decode(const Json& j, const std::string& path, PolicyConstraint& out) {
  JsonReader r(j, path);
  out.min_trust = r.opt<int>("min_trust", 0);
  out.locality_scope = r.opt<LocalityScope>("locality_scope", LocalityScope::kAny);
  r.into("allowed_domains", out.allowed_domains);
  out.data_class = r.opt<DataClass>("data_class", DataClass::kPublic);
  r.into("preferred_domain", out.preferred_domain);
}

void decode(const Json& j, const std::string& path, RequestDescriptor& out) {
  JsonReader r(j, path);
  out.request_id = r.req<std::string>("request_id");
  out.capability_class = r.req<std::string>("capability_class");
  out.quality_target = r.opt<int>("quality_target", 1);
  if (r.has("policy")) decode(j.at("policy"), r.path_of("policy"), out.policy);
  r.into("affinity_token", out.affinity_token);
  r.into("budget", out.budget);
  out.origin_region = r.req<std::string>("origin_region");
  out.input_tokens = r.opt<std::int64_t>("input_tokens", 0);
  out.output_tokens = r.opt<std::int64_t>("output_tokens", 1);
  out.arrival_time = r.opt<std::int64_t>("arrival_time", 0);
  out.degradable = r.opt<bool>("degradable", false);
  out.tenant_id = r.opt<std::string>("tenant_id", "");
  out.session_id = r.opt<std::string>("session_id", "");
  out.prefix_tokens = r.opt<std::int64_t>("prefix_tokens", 0);
  out.prefix_digest = r.opt<std::string>("prefix_digest", "");
  out.decoding_config = r.opt<std::string>("decoding_config", "greedy");
}

void decode(const Json& j, const std::string& path, SecurityLabel& out) {
  JsonReader r(j, path);
  out.min_trust = r.opt<int>("min_trust", 0);
  out.preferred_trust = r.opt<int>("preferred_trust", out.min_trust);
  out.data_class = r.opt<DataClass>("data_class", DataClass::kPrivate);
}

void decode(const Json& j, const std::string& path, ResourceRequirement& out) {
  JsonReader r(j, path);
  out.memory = r.opt<std::int64_t>("memory", 0);
  out.storage = r.opt<std::int64_t>("storage", 0);
  out.accelerator = r.opt<std::string>("accelerator", "");
  out.load_time = r.opt<std::int64_t>("load_time", 0);
}

void decode(const Json& j, const std::string& path, LineageEntry& out) {
  JsonReader r(j, path);
  out.parent_model = r.req<std::string>("parent_model");
  out.derivation = r.opt<std::string>("derivation", "");
}

void decode(const Json& j, const std::string& path, CapabilityDescriptor& out) {
  JsonReader r(j, path);
  out.name = r.req<std::string>("name");
  out.task = r.opt<std::string>("task", "");
  out.quality = r.opt<int>("quality", 1);
  out.latency = r.opt<std::int64_t>("latency", 0);
  if (r.has("security")) decode(j.at("security"), r.path_of("security"), out.security);
  if (r.has("resource")) decode(j.at("resource"), r.path_of("resource"), out.resource);
  r.into("lineage", out.lineage);
}

void decode(const Json& j, const std::string& path, CapabilityVariant& out) {
  JsonReader r(j, path);
  out.variant_id = r.req<std::string>("variant_id");
  out.class_name = r.req<std::string>("class_name");
  out.quality = r.opt<int>("quality", 1);
  out.latency_tier = r.opt<std::int64_t>("latency_tier", 0);
  if (r.has("security")) decode(j.at("security"), r.path_of("security"), out.security);
}

void decode(const Json& j, const std::string& path, CapabilityRealization& out) {
  JsonReader r(j, path);
  out.realization_id = r.req<std::string>("realization_id");
  out.variant_id = r.req<std::string>("variant_id");
  out.accelerator = r.opt<std::string>("accelerator", "");
  out.artifact_size = r.opt<std::int64_t>("artifact_size", 0);
  out.memory = r.opt<std::int64_t>("memory", 0);
  out.load_time = r.opt<std::int64_t>("load_time", 0);
  out.prefill_time_per_token = r.req<std::int64_t>("prefill_time_per_token");
  out.decode_time_per_token = r.req<std::int64_t>("decode_time_per_token");
  out.setup_time = r.opt<std::int64_t>("setup_time", 0);
  out.kv_bytes_per_token = r.opt<std::int64_t>("kv_bytes_per_token", 0);
  out.tokenizer = r.opt<std::string>("tokenizer", "default");
}

void decode(const Json& j, const std::string& path, Hardware& out) {
  JsonReader r(j, path);
  out.accelerator = r.opt<std::string>("accelerator", "");
  out.speed_factor = r.opt<double>("speed_factor", 1.0);
  out.memory = r.opt<std::int64_t>("memory", 0);
  out.storage = r.opt<std::int64_t>("storage", 0);
}

void decode(const Json& j, const std::string& path, Capacity& out) {
  JsonReader r(j, path);
  out.max_concurrent = r.opt<int>("max_concurrent", 1);
  out.memory_budget = r.opt<std::int64_t>("memory_budget", 0);
  out.state_capacity = r.opt<std::int64_t>("state_capacity", 0);
}

void decode(const Json& j, const std::string& path, Residency& out) {
  JsonReader r(j, path);
  out.realization_id = r.req<std::string>("realization_id");
  out.ready_at = r.opt<std::int64_t>("ready_at", 0);
  out.draining = r.opt<bool>("draining", false);
}

void decode(const Json& j, const std::string& path, NodeState& out) {
  JsonReader r(j, path);
  out.queued_work = r.opt<std::int64_t>("queued_work", 0);
  r.into("resident", out.resident);
  out.free_memory = r.opt<std::int64_t>("free_memory", 0);
  out.running = r.opt<int>("running", 0);
  out.queue_length = r.opt<int>("queue_length", 0);
}

void decode(const Json& j, const std::string& path, Locality& out) {
  JsonReader r(j, path);
  out.region = r.req<std::string>("region");
  out.tier = r.req<Tier>("tier");
}

void decode(const Json& j, const std::string& path, ResourceProfile& out) {
  JsonReader r(j, path);
  out.node_id = r.req<std::string>("node_id");
  out.domain_id = r.req<std::string>("domain_id");
  if (r.has("hardware")) decode(j.at("hardware"), r.path_of("hardware"), out.hardware);
  r.into("runtime", out.runtime);
  if (r.has("capacity")) decode(j.at("capacity"), r.path_of("capacity"), out.capacity);
  if (r.has("state")) {
    decode(j.at("state"), r.path_of("state"), out.state);
  } else {
    out.state.free_memory = out.capacity.memory_budget;
  }
  if (!r.has("locality")) fail_field(r.path_of("locality"), "missing required field");
  decode(j.at("locality"), r.path_of("locality"), out.locality);
  out.trust = r.opt<int>("trust", 0);
}

void decode(const Json& j, const std::string& path, ReuseStats& out) {
  JsonReader r(j, path);
  out.lookups = r.opt<std::int64_t>("lookups", 0);
  out.hits = r.opt<std::int64_t>("hits", 0);
}

void decode(const Json& j, const std::string& path, StateDescriptor& out) {
  JsonReader r(j, path);
  out.state_id = r.req<std::string>("state_id");
  out.state_type = r.req<StateType>("state_type");
  out.compatibility_hash = r.req<std::string>("compatibility_hash");
  out.sharing_scope = r.req<SharingScope>("sharing_scope");
  out.size = r.opt<std::int64_t>("size", 0);
  if (r.has("reuse_stats")) decode(j.at("reuse_stats"), r.path_of("reuse_stats"), out.reuse_stats);
  out.privacy_label = r.opt<DataClass>("privacy_label", DataClass::kPublic);
  r.into("decoding_config", out.decoding_config);
  r.into("migration_cost", out.migration_cost);
}

void decode(const Json& j, const std::string& path, PlanStage& out) {
  JsonReader r(j, path);
  out.node_id = r.req<std::string>("node_id");
  out.realization_id = r.req<std::string>("realization_id");
  out.phase = r.opt<Phase>("phase", Phase::kFull);
}

void decode(const Json& j, const std::string& path, CapabilityVersion& out) {
  JsonReader r(j, path);
  out.realization_id = r.req<std::string>("realization_id");
  out.lineage_digest = r.req<std::string>("lineage_digest");
}

void decode(const Json& j, const std::string& path, NodeAttestation& out) {
  JsonReader r(j, path);
  out.node_id = r.req<std::string>("node_id");
  out.trust = r.req<int>("trust");
  out.at = r.opt<std::int64_t>("at", 0);
}

void decode(const Json& j, const std::string& path, CacheUsage& out) {
  JsonReader r(j, path);
  r.into("state_ids", out.state_ids);
  out.tokens_covered = r.opt<std::int64_t>("tokens_covered", 0);
}

void decode(const Json& j, const std::string& path, TimingBreakdown& out) {
  JsonReader r(j, path);
  out.t_net = r.opt<std::int64_t>("t_net", 0);
  out.t_queue = r.opt<std::int64_t>("t_queue", 0);
  out.t_exec = r.opt<std::int64_t>("t_exec", 0);
  out.t_state = r.opt<std::int64_t>("t_state", 0);
  out.c_load = r.opt<std::int64_t>("c_load", 0);
  out.p_policy = r.opt<std::int64_t>("p_policy", 0);
  if (r.has("total")) {
    const Json& t = j.at("total");
    if (t.is_string()) {
      const auto& text = t.get_ref<const std::string&>();
      auto res = std::from_chars(text.data(), text.data() + text.size(), out.total);
      if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        fail_field(r.path_of("total"), "expected a decimal string");
      }
    } else {
      decode(t, r.path_of("total"), out.total);
    }
  }
}

void decode(const Json& j, const std::string& path, ExecutionReceipt& out) {
  JsonReader r(j, path);
  out.request_id = r.req<std::string>("request_id");
  r.into("plan", out.plan);
  r.into("capability_versions", out.capability_versions);
  r.into("node_attestations", out.node_attestations);
  if (r.has("cache_usage")) decode(j.at("cache_usage"), r.path_of("cache_usage"), out.cache_usage);
  out.verdict = r.req<Verdict>("verdict");
  out.reason = r.opt<std::string>("reason", "");
  if (r.has("timing")) decode(j.at("timing"), r.path_of("timing"), out.timing);
  if (r.has("predicted")) decode(j.at("predicted"), r.path_of("predicted"), out.predicted);
  out.arrival_time = r.opt<std::int64_t>("arrival_time", 0);
  out.completion_time = r.opt<std::int64_t>("completion_time", 0);
  out.ttft = r.opt<std::int64_t>("ttft", 0);
  out.tpot = r.opt<std::int64_t>("tpot", 0);
  out.served_quality = r.opt<int>("served_quality", 0);
}

void to_json(Json& j, const PolicyConstraint& v) {
  j = Json{{"min_trust", v.min_trust},
           {"locality_scope", name(v.locality_scope)},
           {"allowed_domains", v.allowed_domains},
           {"data_class", name(v.data_class)}};
  put_optional(j, "preferred_domain", v.preferred_domain);
}

void to_json(Json& j, const RequestDescriptor& v) {
  j = Json{{"request_id", v.request_id},
           {"capability_class", v.capability_class},
           {"quality_target", v.quality_target},
           {"policy", v.policy},
           {"origin_region", v.origin_region},
           {"input_tokens", v.input_tokens},
           {"output_tokens", v.output_tokens},
           {"arrival_time", v.arrival_time},
           {"degradable", v.degradable},
           {"tenant_id", v.tenant_id},
           {"session_id", v.session_id},
           {"prefix_tokens", v.prefix_tokens},
           {"prefix_digest", v.prefix_digest},
           {"decoding_config", v.decoding_config}};
  put_optional(j, "affinity_token", v.affinity_token);
  put_optional(j, "budget", v.budget);
}

void to_json(Json& j, const SecurityLabel& v) {
  j = Json{{"min_trust", v.min_trust},
           {"preferred_trust", v.preferred_trust},
           {"data_class", name(v.data_class)}};
}

void to_json(Json& j, const ResourceRequirement& v) {
  j = Json{{"memory", v.memory},
           {"storage", v.storage},
           {"accelerator", v.accelerator},
           {"load_time", v.load_time}};
}

void to_json(Json& j, const LineageEntry& v) {
  j = Json{{"parent_model", v.parent_model}, {"derivation", v.derivation}};
}

void to_json(Json& j, const CapabilityDescriptor& v) {
  j = Json{{"name", v.name},         {"task", v.task},         {"quality", v.quality},
           {"latency", v.latency},   {"security", v.security}, {"resource", v.resource},
           {"lineage", v.lineage}};
}

void to_json(Json& j, const CapabilityVariant& v) {
  j = Json{{"variant_id", v.variant_id},
           {"class_name", v.class_name},
           {"quality", v.quality},
           {"latency_tier", v.latency_tier},
           {"security", v.security}};
}

void to_json(Json& j, const CapabilityRealization& v) {
  j = Json{{"realization_id", v.realization_id},
           {"variant_id", v.variant_id},
           {"accelerator", v.accelerator},
           {"artifact_size", v.artifact_size},
           {"memory", v.memory},
           {"load_time", v.load_time},
           {"prefill_time_per_token", v.prefill_time_per_token},
           {"decode_time_per_token", v.decode_time_per_token},
           {"setup_time", v.setup_time},
           {"kv_bytes_per_token", v.kv_bytes_per_token},
           {"tokenizer", v.tokenizer}};
}

void to_json(Json& j, const Hardware& v) {
  j = Json{{"accelerator", v.accelerator},
           {"speed_factor", v.speed_factor},
           {"memory", v.memory},
           {"storage", v.storage}};
}

void to_json(Json& j, const Capacity& v) {
  j = Json{{"max_concurrent", v.max_concurrent},
           {"memory_budget", v.memory_budget},
           {"state_capacity", v.state_capacity}};
}

void to_json(Json& j, const Residency& v) {
  j = Json{{"realization_id", v.realization_id},
           {"ready_at", v.ready_at},
           {"draining", v.draining}};
}

void to_json(Json& j, const NodeState& v) {
  j = Json{{"queued_work", v.queued_work},
           {"resident", v.resident},
           {"free_memory", v.free_memory},
           {"running", v.running},
           {"queue_length", v.queue_length}};
}

void to_json(Json& j, const Locality& v) {
  j = Json{{"region", v.region}, {"tier", name(v.tier)}};
}

void to_json(Json& j, const ResourceProfile& v) {
  j = Json{{"node_id", v.node_id},   {"domain_id", v.domain_id}, {"hardware", v.hardware},
           {"runtime", v.runtime},   {"capacity", v.capacity},   {"state", v.state},
           {"locality", v.locality}, {"trust", v.trust}};
}

void to_json(Json& j, const ReuseStats& v) {
  j = Json{{"lookups", v.lookups}, {"hits", v.hits}};
}

void to_json(Json& j, const StateDescriptor& v) {
  j = Json{{"state_id", v.state_id},
           {"state_type", name(v.state_type)},
           {"compatibility_hash", v.compatibility_hash},
           {"sharing_scope", name(v.sharing_scope)},
           {"size", v.size},
           {"reuse_stats", v.reuse_stats},
           {"privacy_label", name(v.privacy_label)}};
  put_optional(j, "decoding_config", v.decoding_config);
  put_optional(j, "migration_cost", v.migration_cost);
}

void to_json(Json& j, const PlanStage& v) {
  j = Json{{"node_id", v.node_id},
           {"realization_id", v.realization_id},
           {"phase", name(v.phase)}};
}

void to_json(Json& j, const CapabilityVersion& v) {
  j = Json{{"realization_id", v.realization_id}, {"lineage_digest", v.lineage_digest}};
}

void to_json(Json& j, const NodeAttestation& v) {
  j = Json{{"node_id", v.node_id}, {"trust", v.trust}, {"at", v.at}};
}

void to_json(Json& j, const CacheUsage& v) {
  j = Json{{"state_ids", v.state_ids}, {"tokens_covered", v.tokens_covered}};
}

void to_json(Json& j, const TimingBreakdown& v) {
  j = Json{{"t_net", v.t_net},   {"t_queue", v.t_queue}, {"t_exec", v.t_exec},
           {"t_state", v.t_state}, {"c_load", v.c_load}, {"p_policy", v.p_policy},
           {"total", format_fixed(v.total)}};
}

void to_json(Json& j, const ExecutionReceipt& v) {
  j = Json{{"request_id", v.request_id},
           {"plan", v.plan},
           {"capability_versions", v.capability_versions},
           {"node_attestations", v.node_attestations},
           {"cache_usage", v.cache_usage},
           {"verdict", name(v.verdict)},
           {"reason", v.reason},
           {"timing", v.timing},
           {"predicted", v.predicted},
           {"arrival_time", v.arrival_time},
           {"completion_time", v.completion_time},
           {"ttft", v.ttft},
           {"tpot", v.tpot},
           {"served_quality", v.served_quality}};
}

std::string format_fixed(double value, int precision) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, precision);
  return std::string(buf, res.ptr);
}

}  // namespace idn
