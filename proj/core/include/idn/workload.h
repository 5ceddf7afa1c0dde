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

// Synthetic request streams: Poisson session starts per region, geometric
// turn counts, Zipf class popularity and lognormal token counts.
//
// Reproducibility: each region draws from its own std::mt19937_64 seeded with
// (seed XOR region_index), region_index being the region's position in
// WorkloadSpec::regions. All distributions are computed here from raw 64-bit
// draws so the stream does not depend on the standard library's distribution
// classes.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "idn/descriptors.h"

namespace idn {

struct TokenDistribution {
  double mu = 0.0;  // of the underlying normal
  double sigma = 0.0;
  std::optional<TokenCount> fixed;  // overrides the lognormal when set
  TokenCount min = 0;
};

struct PolicyTemplate {
  std::string name;
  double weight = 1.0;
  PolicyConstraint policy;
  int quality_target = 1;
  bool degradable = false;
  std::optional<double> budget;
  std::string tenant_id;  // empty: one tenant per region
};

struct Surge {
  Micros start = 0;
  Micros end = 0;
  double multiplier = 1.0;
};

struct RegionWorkload {
  RegionId region;
  double rate = 0.0;  // requests per second, averaged over sessions
  double zipf_s = 0.0;
  std::vector<ClassName> classes;  // popularity rank order
  double turn_stop = 1.0;          // geometric parameter g; mean turns = 1/g
  TokenCount prefix_tokens = 0;    // shared by all turns of a session
  Micros think_time = 5'000'000;   // mean gap between turns
  TokenDistribution input;         // tokens beyond the shared prefix
  TokenDistribution output{0.0, 0.0, TokenCount{1}, 1};
  std::vector<PolicyTemplate> policies;
  std::vector<Surge> surges;
};

struct WorkloadSpec {
  std::vector<RegionWorkload> regions;
  std::uint64_t seed = 1;
};

// Raw-bit based draws over a 64-bit Mersenne Twister.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : gen_(seed) {}

  double uniform();  // [0, 1)
  double exponential(double rate);
  double normal();
  double lognormal(double mu, double sigma);
  std::int64_t geometric(double p);  // trials until first success, >= 1
  std::size_t zipf(std::size_t n, double s);
  std::size_t weighted(const std::vector<double>& weights);

 private:
  std::mt19937_64 gen_;
};

struct Arrivals {
  std::vector<RequestDescriptor> requests;  // sorted by (arrival_time, request_id)
  std::map<std::string, Micros> session_last_arrival;
};

Arrivals generate_arrivals(const WorkloadSpec& spec, Micros duration, std::uint64_t seed);

TokenCount sample_tokens(Stream& stream, const TokenDistribution& d);

}  // namespace idn
