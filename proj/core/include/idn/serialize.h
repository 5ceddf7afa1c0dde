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

// Canonical JSON form of every descriptor. Encoding goes through the usual
// nlohmann to_json hooks; decoding goes through `decode`, which reports the
// offending field path on malformed input instead of a bare type error.

#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "idn/descriptors.h"

namespace idn {

using Json = nlohmann::json;

// Primitive decoders. All throw IdnError(kScenarioInvalid) naming `path`.
void decode(const Json& j, const std::string& path, std::string& out);
void decode(const Json& j, const std::string& path, std::int64_t& out);
void decode(const Json& j, const std::string& path, int& out);
void decode(const Json& j, const std::string& path, double& out);
void decode(const Json& j, const std::string& path, bool& out);
void decode(const Json& j, const std::string& path, Tier& out);
void decode(const Json& j, const std::string& path, LocalityScope& out);
void decode(const Json& j, const std::string& path, DataClass& out);
void decode(const Json& j, const std::string& path, StateType& out);
void decode(const Json& j, const std::string& path, SharingScope& out);
void decode(const Json& j, const std::string& path, Verdict& out);
void decode(const Json& j, const std::string& path, Phase& out);

template <typename T>
void decode(const Json& j, const std::string& path, std::vector<T>& out);
template <typename T>
void decode(const Json& j, const std::string& path, std::optional<T>& out);

// Thin accessor over one JSON object that keeps track of where it is.
class JsonReader {
 public:
  JsonReader(const Json& j, std::string path);

  const Json& json() const { return j_; }
  const std::string& path() const { return path_; }
  std::string path_of(const char* key) const { return path_ + "." + key; }
  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  template <typename T>
  T req(const char* key) const {
    if (!has(key)) fail_missing(key);
    T out{};
    decode(j_.at(key), path_of(key), out);
    return out;
  }

  template <typename T>
  T opt(const char* key, T fallback) const {
    if (!has(key)) return fallback;
    T out{};
    decode(j_.at(key), path_of(key), out);
    return out;
  }

  template <typename T>
  void into(const char* key, T& out) const {
    if (has(key)) decode(j_.at(key), path_of(key), out);
  }

 private:
  [[noreturn]] void fail_missing(const char* key) const;

  const Json& j_;
  std::string path_;
};

[[noreturn]] void fail_field(const std::string& path, const std::string& message);

void decode(const Json& j, const std::string& path, PolicyConstraint& out);
void decode(const Json& j, const std::string& path, RequestDescriptor& out);
void decode(const Json& j, const std::string& path, SecurityLabel& out);
void decode(const Json& j, const std::string& path, ResourceRequirement& out);
void decode(const Json& j, const std::string& path, LineageEntry& out);
void decode(const Json& j, const std::string& path, CapabilityDescriptor& out);
void decode(const Json& j, const std::string& path, CapabilityVariant& out);
void decode(const Json& j, const std::string& path, CapabilityRealization& out);
void decode(const Json& j, const std::string& path, Hardware& out);
void decode(const Json& j, const std::string& path, Capacity& out);
void decode(const Json& j, const std::string& path, Residency& out);
void decode(const Json& j, const std::string& path, NodeState& out);
void decode(const Json& j, const std::string& path, Locality& out);
void decode(const Json& j, const std::string& path, ResourceProfile& out);
void decode(const Json& j, const std::string& path, ReuseStats& out);
void decode(const Json& j, const std::string& path, StateDescriptor& out);
void decode(const Json& j, const std::string& path, PlanStage& out);
void decode(const Json& j, const std::string& path, CapabilityVersion& out);
void decode(const Json& j, const std::string& path, NodeAttestation& out);
void decode(const Json& j, const std::string& path, CacheUsage& out);
void decode(const Json& j, const std::string& path, TimingBreakdown& out);
void decode(const Json& j, const std::string& path, ExecutionReceipt& out);

template <typename T>
void decode(const Json& j, const std::string& path, std::vector<T>& out) {
  if (!j.is_array()) fail_field(path, "expected array");
  out.clear();
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    T item{};
    decode(j.at(i), path + "[" + std::to_string(i) + "]", item);
    out.push_back(std::move(item));
  }
}

template <typename T>
void decode(const Json& j, const std::string& path, std::optional<T>& out) {
  if (j.is_null()) {
    out.reset();
    return;
  }
  T value{};
  decode(j, path, value);
  out = std::move(value);
}

template <typename T>
T decode_as(const Json& j, const std::string& path = "$") {
  T out{};
  decode(j, path, out);
  return out;
}

void to_json(Json& j, const PolicyConstraint& v);
void to_json(Json& j, const RequestDescriptor& v);
void to_json(Json& j, const SecurityLabel& v);
void to_json(Json& j, const ResourceRequirement& v);
void to_json(Json& j, const LineageEntry& v);
void to_json(Json& j, const CapabilityDescriptor& v);
void to_json(Json& j, const CapabilityVariant& v);
void to_json(Json& j, const CapabilityRealization& v);
void to_json(Json& j, const Hardware& v);
void to_json(Json& j, const Capacity& v);
void to_json(Json& j, const Residency& v);
void to_json(Json& j, const NodeState& v);
void to_json(Json& j, const Locality& v);
void to_json(Json& j, const ResourceProfile& v);
void to_json(Json& j, const ReuseStats& v);
void to_json(Json& j, const StateDescriptor& v);
void to_json(Json& j, const PlanStage& v);
void to_json(Json& j, const CapabilityVersion& v);
void to_json(Json& j, const NodeAttestation& v);
void to_json(Json& j, const CacheUsage& v);
void to_json(Json& j, const TimingBreakdown& v);
void to_json(Json& j, const ExecutionReceipt& v);

// Fixed-precision, locale-independent decimal rendering.
std::string format_fixed(double value, int precision = 6);

}  // namespace idn
