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

#include "idn/workload.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "idn/digest.h"

namespace idn {

double Stream::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Stream::exponential(double rate) {
  return -std::log1p(-uniform()) / rate;
}

double Stream::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Stream::lognormal(double mu, double sigma) {
  return std::exp(mu + sigma * normal());
}

std::int64_t Stream::geometric(double p) {
  if (p >= 1.0) return 1;
  const double u = 1.0 - uniform();
  return 1 + static_cast<std::int64_t>(std::floor(std::log(u) / std::log1p(-p)));
}

std::size_t Stream::zipf(std::size_t n, double s) {
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = 1.0 / std::pow(static_cast<double>(k + 1), s);
  return weighted(w);
}

std::size_t Stream::weighted(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double target = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (target < acc) return i;
  }
  return weights.size() - 1;
}

TokenCount sample_tokens(Stream& stream, const TokenDistribution& d) {
  if (d.fixed) return std::max(*d.fixed, d.min);
  const double x = stream.lognormal(d.mu, d.sigma);
  return std::max<TokenCount>(d.min, std::llround(x));
}

namespace {

double peak_multiplier(const RegionWorkload& w) {
  double m = 1.0;
  for (const auto& s : w.surges) m = std::max(m, s.multiplier);
  return m;
}

double multiplier_at(const RegionWorkload& w, Micros t) {
  double m = 1.0;
  for (const auto& s : w.surges) {
    if (t >= s.start && t < s.end) m = std::max(m, s.multiplier);
  }
  return m;
}

}  // namespace

Arrivals generate_arrivals(const WorkloadSpec& spec, Micros duration, std::uint64_t seed) {
  Arrivals out;
  for (std::size_t ri = 0; ri < spec.regions.size(); ++ri) {
    const auto& w = spec.regions[ri];
    if (w.rate <= 0.0 || w.classes.empty() || duration <= 0) continue;
    Stream rng(seed ^ static_cast<std::uint64_t>(ri));
    const double g = std::clamp(w.turn_stop, 1e-9, 1.0);
    const double peak = peak_multiplier(w);
    const double start_rate = w.rate * g * peak / 1e6;  // sessions per μs at peak

    std::vector<double> policy_weights;
    for (const auto& p : w.policies) policy_weights.push_back(p.weight);

    double t = 0.0;
    std::int64_t session_index = 0;
    while (true) {
      t += rng.exponential(start_rate);
      if (t >= static_cast<double>(duration)) break;
      const auto start = static_cast<Micros>(t);
      // Thinning keeps the surge profile exact for a non-homogeneous rate.
      const double keep = rng.uniform();
      if (keep >= multiplier_at(w, start) / peak) continue;

      const std::string session_id = w.region + "-s" + std::to_string(session_index++);
      const ClassName cls = w.classes[rng.zipf(w.classes.size(), w.zipf_s)];
      const PolicyTemplate* tpl = nullptr;
      if (!w.policies.empty()) tpl = &w.policies[rng.weighted(policy_weights)];
      const std::int64_t turns = rng.geometric(g);
      const std::string prefix_digest = sha256_hex("prefix/" + session_id).substr(0, 32);

      Micros at = start;
      for (std::int64_t turn = 0; turn < turns; ++turn) {
        if (turn > 0) {
          at += static_cast<Micros>(rng.exponential(1.0 / static_cast<double>(w.think_time)));
        }
        const TokenCount fresh = sample_tokens(rng, w.input);
        const TokenCount output = std::max<TokenCount>(1, sample_tokens(rng, w.output));
        if (at >= duration) continue;  // draws above keep the stream aligned

        RequestDescriptor q;
        q.request_id = session_id + "-t" + std::to_string(turn);
        q.capability_class = cls;
        q.origin_region = w.region;
        q.arrival_time = at;
        q.session_id = session_id;
        q.prefix_tokens = w.prefix_tokens;
        q.prefix_digest = prefix_digest;
        q.input_tokens = w.prefix_tokens + fresh;
        q.output_tokens = output;
        q.tenant_id = "tenant-" + w.region;
        if (tpl != nullptr) {
          q.policy = tpl->policy;
          q.quality_target = tpl->quality_target;
          q.degradable = tpl->degradable;
          q.budget = tpl->budget;
          if (!tpl->tenant_id.empty()) q.tenant_id = tpl->tenant_id;
        }
        if (w.prefix_tokens > 0) q.affinity_token = session_id + ":" + prefix_digest.substr(0, 16);
        out.session_last_arrival[session_id] = at;
        out.requests.push_back(std::move(q));
      }
    }
  }
  std::sort(out.requests.begin(), out.requests.end(),
            [](const RequestDescriptor& a, const RequestDescriptor& b) {
              return std::tie(a.arrival_time, a.request_id) <
                     std::tie(b.arrival_time, b.request_id);
            });
  return out;
}

}  // namespace idn
