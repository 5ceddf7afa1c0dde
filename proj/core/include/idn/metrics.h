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
#include <map>
#include <string>
#include <vector>

#include "idn/descriptors.h"
#include "idn/routing.h"
#include "idn/serialize.h"

namespace idn {

// Realized schedule of one stage.
struct StageSpan {
  Micros ready = 0;  // inputs available at the node
  Micros start = 0;  // slot acquired
  StageTiming timing;

  Micros end() const { return start + timing.total(); }
};

struct RequestTimeline {
  Micros arrival = 0;
  std::vector<StageSpan> stages;
  Micros response = 0;  // transfer of the output back to the origin
};

struct TokenTiming {
  Micros ttft = 0;
  Micros tpot = 0;
};

// First token leaves the last stage after its setup, any prefill it runs and
// one decode step; later tokens follow at the decode stage's per-token pace.
TokenTiming compute_ttft_tpot(const RequestTimeline& timeline);

enum class Outcome { kServed, kRejected, kTruncated };

std::string_view to_string(Outcome o);

struct RequestRecord {
  std::string request_id;
  ClassName capability_class;
  RegionId region;
  Outcome outcome = Outcome::kServed;
  std::string reason;
  bool admitted = false;  // passed selection
  bool degraded = false;
  Micros arrival = 0;
  Micros completion = 0;
  Micros latency = 0;
  Micros ttft = 0;
  Micros tpot = 0;
  bool prefix_eligible = false;
  bool prefix_hit = false;
  TokenCount covered_tokens = 0;
};

struct Percentiles {
  Micros p50 = 0;
  Micros p95 = 0;
  Micros p99 = 0;

  bool operator==(const Percentiles&) const = default;
};

// Nearest-rank percentile of an unsorted sample; 0 for an empty one.
Micros percentile(std::vector<Micros> values, double p);

struct Aggregates {
  std::int64_t arrivals = 0;
  std::int64_t served = 0;
  std::int64_t rejected = 0;
  std::int64_t truncated = 0;
  std::int64_t admitted = 0;
  std::int64_t degraded = 0;
  std::map<std::string, std::int64_t> rejections_by_reason;
  Percentiles latency;
  Percentiles ttft;
  Percentiles tpot;
  double mean_ttft = 0.0;
  double completion_rate = 0.0;           // served / non-truncated arrivals
  double admitted_completion_rate = 0.0;  // served / admitted non-truncated
  double prefix_hit_ratio = 0.0;
  std::int64_t prefix_lookups = 0;
  std::int64_t prefix_hits = 0;

  bool operator==(const Aggregates&) const = default;
};

Aggregates aggregate(const std::vector<RequestRecord>& records);

struct MetricsFrame {
  std::vector<RequestRecord> records;
  Aggregates totals;
  std::map<std::string, double> hit_ratio_by_state_type;
  std::map<NodeId, double> node_utilization;
  std::map<NodeId, int> peak_queue_length;
  std::map<NodeId, int> peak_running;
  Bytes core_bytes = 0;
  std::int64_t placement_churn = 0;
  Micros model_load_overhead = 0;
  std::map<std::string, std::int64_t> demand_by_class_region;  // "class@region"
  Micros duration = 0;
  std::uint64_t seed = 0;
};

// Structured metrics document. Ratios are fixed six-decimal strings.
Json metrics_to_json(const MetricsFrame& frame);

}  // namespace idn
