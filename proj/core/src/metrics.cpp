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

#include "idn/metrics.h"

#include <algorithm>
#include <cmath>

namespace idn {

TokenTiming compute_ttft_tpot(const RequestTimeline& timeline) {
  TokenTiming out;
  if (timeline.stages.empty()) return out;
  const auto& last = timeline.stages.back();
  const Micros first_token =
      last.start + last.timing.setup + last.timing.prefill + last.timing.per_output_token;
  out.ttft = first_token - timeline.arrival;
  out.tpot = last.timing.per_output_token;
  return out;
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::kServed: return "served";
    case Outcome::kRejected: return "rejected";
    case Outcome::kTruncated: return "truncated";
  }
  return "unknown";
}

Micros percentile(std::vector<Micros> values, double p) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

namespace {

Percentiles percentiles_of(const std::vector<Micros>& v) {
  return {percentile(v, 50), percentile(v, 95), percentile(v, 99)};
}

double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

Json percentiles_json(const Percentiles& p) {
  return Json{{"p50", p.p50}, {"p95", p.p95}, {"p99", p.p99}};
}

}  // namespace

Aggregates aggregate(const std::vector<RequestRecord>& records) {
  Aggregates a;
  std::vector<Micros> latency, ttft, tpot;
  std::int64_t admitted_done = 0;
  for (const auto& r : records) {
    ++a.arrivals;
    if (r.admitted) ++a.admitted;
    if (r.degraded) ++a.degraded;
    switch (r.outcome) {
      case Outcome::kServed:
        ++a.served;
        latency.push_back(r.latency);
        ttft.push_back(r.ttft);
        tpot.push_back(r.tpot);
        break;
      case Outcome::kRejected:
        ++a.rejected;
        ++a.rejections_by_reason[r.reason];
        break;
      case Outcome::kTruncated:
        ++a.truncated;
        break;
    }
    if (r.admitted && r.outcome != Outcome::kTruncated) ++admitted_done;
    if (r.prefix_eligible && r.admitted && r.outcome == Outcome::kServed) {
      ++a.prefix_lookups;
      if (r.prefix_hit) ++a.prefix_hits;
    }
  }
  a.latency = percentiles_of(latency);
  a.ttft = percentiles_of(ttft);
  a.tpot = percentiles_of(tpot);
  if (!ttft.empty()) {
    double sum = 0.0;
    for (auto v : ttft) sum += static_cast<double>(v);
    a.mean_ttft = sum / static_cast<double>(ttft.size());
  }
  a.completion_rate = ratio(a.served, a.arrivals - a.truncated);
  a.admitted_completion_rate = ratio(a.served, admitted_done);
  a.prefix_hit_ratio = ratio(a.prefix_hits, a.prefix_lookups);
  return a;
}

Json metrics_to_json(const MetricsFrame& f) {
  const auto& t = f.totals;
  Json reasons = Json::object();
  for (const auto& [k, v] : t.rejections_by_reason) reasons[k] = v;
  Json hit = Json::object();
  for (const auto& [k, v] : f.hit_ratio_by_state_type) hit[k] = format_fixed(v);
  Json util = Json::object();
  for (const auto& [k, v] : f.node_utilization) util[k] = format_fixed(v);
  Json peak_q = Json::object();
  for (const auto& [k, v] : f.peak_queue_length) peak_q[k] = v;
  Json peak_r = Json::object();
  for (const auto& [k, v] : f.peak_running) peak_r[k] = v;
  Json demand = Json::object();
  for (const auto& [k, v] : f.demand_by_class_region) demand[k] = v;

  return Json{
      {"schema", "idn.metrics/1"},
      {"seed", f.seed},
      {"duration", f.duration},
      {"requests",
       {{"arrivals", t.arrivals},
        {"served", t.served},
        {"rejected", t.rejected},
        {"horizon_truncated", t.truncated},
        {"admitted", t.admitted},
        {"degraded", t.degraded},
        {"rejections_by_reason", reasons}}},
      {"completion_rate", format_fixed(t.completion_rate)},
      {"admitted_completion_rate", format_fixed(t.admitted_completion_rate)},
      {"latency", percentiles_json(t.latency)},
      {"ttft", percentiles_json(t.ttft)},
      {"tpot", percentiles_json(t.tpot)},
      {"mean_ttft", format_fixed(t.mean_ttft)},
      {"prefix",
       {{"lookups", t.prefix_lookups},
        {"hits", t.prefix_hits},
        {"hit_ratio", format_fixed(t.prefix_hit_ratio)}}},
      {"cache_hit_ratio_by_state_type", hit},
      {"node_utilization", util},
      {"peak_queue_length", peak_q},
      {"peak_running", peak_r},
      {"core_bytes", f.core_bytes},
      {"placement_churn", f.placement_churn},
      {"model_load_overhead", f.model_load_overhead},
      {"demand_by_class_region", demand},
  };
}

}  // namespace idn
