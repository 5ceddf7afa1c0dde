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

#include "idn/scenario.h"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace idn {
namespace {

void decode_domain(const Json& j, const std::string& path, Domain& out) {
  JsonReader r(j, path);
  out.domain_id = r.req<std::string>("domain_id");
  out.admission_floor = r.opt<int>("admission_floor", 0);
  out.operator_tag = r.opt<std::string>("operator_tag", "");
}

void decode_node(const Json& j, const std::string& path, Node& out) {
  decode(j, path, out.profile);
  out.node_id = out.profile.node_id;
  out.online = JsonReader(j, path).opt<bool>("online", true);
}

void decode_link(const Json& j, const std::string& path, Link& out) {
  JsonReader r(j, path);
  out.link_id = r.req<std::string>("link_id");
  out.a = r.req<std::string>("a");
  out.b = r.req<std::string>("b");
  out.propagation_delay = r.req<std::int64_t>("propagation_delay");
  out.bandwidth = r.req<std::int64_t>("bandwidth");
  out.is_core = r.opt<bool>("is_core", false);
}

void decode_tokens(const Json& j, const std::string& path, TokenDistribution& out) {
  JsonReader r(j, path);
  out.mu = r.opt<double>("mu", 0.0);
  out.sigma = r.opt<double>("sigma", 0.0);
  out.fixed.reset();  // a sampled distribution replaces the default
  r.into("fixed", out.fixed);
  out.min = r.opt<std::int64_t>("min", 0);
}

void decode_template(const Json& j, const std::string& path, PolicyTemplate& out) {
  JsonReader r(j, path);
  out.name = r.opt<std::string>("name", "");
  out.weight = r.opt<double>("weight", 1.0);
  if (r.has("policy")) decode(j.at("policy"), r.path_of("policy"), out.policy);
  out.quality_target = r.opt<int>("quality_target", 1);
  out.degradable = r.opt<bool>("degradable", false);
  r.into("budget", out.budget);
  out.tenant_id = r.opt<std::string>("tenant_id", "");
}

void decode_region_workload(const Json& j, const std::string& path, RegionWorkload& out) {
  JsonReader r(j, path);
  out.region = r.req<std::string>("region");
  out.rate = r.opt<double>("rate", 0.0);
  out.zipf_s = r.opt<double>("zipf_s", 0.0);
  r.into("classes", out.classes);
  out.turn_stop = r.opt<double>("turn_stop", 1.0);
  out.prefix_tokens = r.opt<std::int64_t>("prefix_tokens", 0);
  out.think_time = r.opt<std::int64_t>("think_time", out.think_time);
  if (r.has("input")) decode_tokens(j.at("input"), r.path_of("input"), out.input);
  if (r.has("output")) decode_tokens(j.at("output"), r.path_of("output"), out.output);
  if (r.has("policies")) {
    const auto& arr = j.at("policies");
    if (!arr.is_array()) fail_field(r.path_of("policies"), "expected array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      PolicyTemplate t;
      decode_template(arr[i], r.path_of("policies") + "[" + std::to_string(i) + "]", t);
      out.policies.push_back(std::move(t));
    }
  }
  if (r.has("surges")) {
    const auto& arr = j.at("surges");
    if (!arr.is_array()) fail_field(r.path_of("surges"), "expected array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      JsonReader s(arr[i], r.path_of("surges") + "[" + std::to_string(i) + "]");
      out.surges.push_back({s.req<std::int64_t>("start"), s.req<std::int64_t>("end"),
                            s.req<double>("multiplier")});
    }
  }
}

template <typename T, typename F>
void decode_list(const JsonReader& r, const char* key, std::vector<T>& out, F&& fn) {
  if (!r.has(key)) return;
  const auto& arr = r.json().at(key);
  if (!arr.is_array()) fail_field(r.path_of(key), "expected array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    T item{};
    fn(arr[i], r.path_of(key) + "[" + std::to_string(i) + "]", item);
    out.push_back(std::move(item));
  }
}

void decode_routing(const Json& j, const std::string& path, RoutingConfig& out) {
  JsonReader r(j, path);
  if (r.has("weights")) {
    JsonReader w(j.at("weights"), r.path_of("weights"));
    out.weights.alpha = w.opt<double>("alpha", 1.0);
    out.weights.beta = w.opt<double>("beta", 1.0);
    out.weights.gamma = w.opt<double>("gamma", 1.0);
    out.weights.delta = w.opt<double>("delta", 1.0);
    out.weights.epsilon = w.opt<double>("epsilon", 1.0);
    out.weights.zeta = w.opt<double>("zeta", 1.0);
  }
  out.load_penalty = r.opt<double>("load_penalty", 0.0);
  out.policy_penalty = r.opt<double>("policy_penalty", 0.0);
  out.tie_epsilon = r.opt<double>("tie_epsilon", 1e-9);
  out.bytes_per_token = r.opt<std::int64_t>("bytes_per_token", 4);
  r.into("admission_cap", out.admission_cap);
  out.split_enabled = r.opt<bool>("split_enabled", true);
  out.repository = r.opt<std::string>("repository", "");
}

void decode_placement(const Json& j, const std::string& path, PlacementSettings& out) {
  JsonReader r(j, path);
  out.enabled = r.opt<bool>("enabled", true);
  out.epoch = r.opt<std::int64_t>("epoch", out.epoch);
  out.window = r.opt<std::int64_t>("window", out.window);
  out.max_rounds = r.opt<int>("max_rounds", out.max_rounds);
  out.weights.deploy = r.opt<double>("deploy_weight", 1.0);
  out.weights.network = r.opt<double>("network_weight", 1.0);
  out.weights.risk = r.opt<double>("risk_weight", 1.0);
  out.weights.storage_unit_cost = r.opt<double>("storage_unit_cost", 0.0);
  out.weights.miss_penalty = r.opt<std::int64_t>("miss_penalty", out.weights.miss_penalty);
}

void decode_cache(const Json& j, const std::string& path, CacheConfig& out) {
  JsonReader r(j, path);
  out.enabled = r.opt<bool>("enabled", true);
  out.reuse_window = r.opt<std::int64_t>("reuse_window", out.reuse_window);
  out.storage_unit_cost = r.opt<double>("storage_unit_cost", 0.0);
  out.residency_epoch = r.opt<std::int64_t>("residency_epoch", out.residency_epoch);
  const auto eviction = r.opt<std::string>("eviction", "benefit_density");
  if (eviction == "benefit_density") {
    out.eviction = EvictionPolicy::kBenefitDensity;
  } else if (eviction == "lru") {
    out.eviction = EvictionPolicy::kLru;
  } else {
    fail_field(r.path_of("eviction"), "expected 'benefit_density' or 'lru'");
  }
}

}  // namespace

Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Translate the byte offset into a line and column.
    const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw IdnError(ErrorCode::kParseError, "line " + std::to_string(line) + ", column " +
                                               std::to_string(column) + ": " + e.what());
  }
}

Scenario scenario_from_json(const Json& j) {
  Scenario s;
  JsonReader r(j, "$");
  s.name = r.opt<std::string>("name", "");
  s.seed = static_cast<std::uint64_t>(r.opt<std::int64_t>("seed", 1));
  s.duration = r.req<std::int64_t>("duration");
  s.session_linger = r.opt<std::int64_t>("session_linger", s.session_linger);

  if (!r.has("topology")) fail_field("$.topology", "missing required field");
  JsonReader topo(j.at("topology"), "$.topology");
  topo.into("regions", s.regions);
  decode_list(topo, "domains", s.domains, decode_domain);
  decode_list(topo, "nodes", s.nodes, decode_node);
  decode_list(topo, "links", s.links, decode_link);

  if (!r.has("catalog")) fail_field("$.catalog", "missing required field");
  JsonReader cat(j.at("catalog"), "$.catalog");
  cat.into("classes", s.classes);
  cat.into("variants", s.variants);
  cat.into("realizations", s.realizations);

  decode_list(r, "initial_placement", s.initial_placement,
              [](const Json& e, const std::string& p, PlacementEntry& out) {
                JsonReader x(e, p);
                out.realization_id = x.req<std::string>("realization_id");
                out.node_id = x.req<std::string>("node_id");
                out.pinned = x.opt<bool>("pinned", false);
              });

  if (r.has("workload")) {
    JsonReader w(j.at("workload"), "$.workload");
    decode_list(w, "regions", s.workload.regions, decode_region_workload);
  }
  s.workload.seed = s.seed;
  r.into("requests", s.requests);

  if (r.has("routing")) decode_routing(j.at("routing"), "$.routing", s.routing);
  if (r.has("placement")) decode_placement(j.at("placement"), "$.placement", s.placement);
  if (r.has("cache")) decode_cache(j.at("cache"), "$.cache", s.cache);

  if (r.has("trust")) {
    JsonReader t(j.at("trust"), "$.trust");
    decode_list(t, "attestations", s.attestations,
                [](const Json& e, const std::string& p, AttestationRecord& out) {
                  JsonReader x(e, p);
                  out.node_id = x.req<std::string>("node_id");
                  out.trust = x.req<int>("trust");
                  out.issue_time = x.opt<std::int64_t>("issue_time", 0);
                  out.validity = x.req<std::int64_t>("validity");
                });
    decode_list(t, "revocations", s.revocations,
                [](const Json& e, const std::string& p, Revocation& out) {
                  JsonReader x(e, p);
                  out.realization_id = x.req<std::string>("realization_id");
                  out.at = x.req<std::int64_t>("at");
                });
  }
  decode_list(r, "node_events", s.node_events,
              [](const Json& e, const std::string& p, NodeEvent& out) {
                JsonReader x(e, p);
                const auto kind = x.req<std::string>("kind");
                if (kind == "node_offline") {
                  out.kind = NodeEventKind::kOffline;
                } else if (kind == "node_online") {
                  out.kind = NodeEventKind::kOnline;
                } else {
                  fail_field(x.path_of("kind"), "expected 'node_offline' or 'node_online'");
                }
                out.node_id = x.req<std::string>("node_id");
                out.at = x.req<std::int64_t>("at");
              });
  return s;
}

ValidationResult validate_scenario(const Scenario& s) {
  ValidationResult out;
  auto bad = [&](std::string path, std::string message) {
    out.push_back({std::move(path), std::move(message)});
  };
  auto idx = [](const std::string& base, std::size_t i) {
    return base + "[" + std::to_string(i) + "]";
  };
  auto append = [&](ValidationResult v) { out.insert(out.end(), v.begin(), v.end()); };

  if (s.duration <= 0) bad("$.duration", "duration > 0");

  std::set<std::string> regions;
  std::set<std::string> vertices;
  for (std::size_t i = 0; i < s.regions.size(); ++i) {
    if (!regions.insert(s.regions[i]).second) bad(idx("$.topology.regions", i), "duplicate region");
    vertices.insert(s.regions[i]);
  }
  std::map<std::string, const Domain*> domains;
  for (std::size_t i = 0; i < s.domains.size(); ++i) {
    if (!domains.emplace(s.domains[i].domain_id, &s.domains[i]).second) {
      bad(idx("$.topology.domains", i) + ".domain_id", "duplicate domain");
    }
  }
  std::map<std::string, const Node*> nodes;
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    const auto& n = s.nodes[i];
    const auto path = idx("$.topology.nodes", i);
    if (!nodes.emplace(n.node_id, &n).second || !vertices.insert(n.node_id).second) {
      bad(path + ".node_id", "duplicate node or vertex id");
    }
    append(validate_descriptor(n.profile, path));
    if (!(n.profile.hardware.speed_factor > 0.0)) bad(path + ".hardware.speed_factor", "speed_factor > 0");
    auto d = domains.find(n.profile.domain_id);
    if (d == domains.end()) {
      bad(path + ".domain_id", "unknown domain '" + n.profile.domain_id + "'");
    } else if (n.profile.trust < d->second->admission_floor) {
      bad(path + ".trust", "trust below the domain admission floor");
    }
    if (!regions.count(n.profile.locality.region)) {
      bad(path + ".locality.region", "unknown region '" + n.profile.locality.region + "'");
    }
    if (n.profile.capacity.max_concurrent < 1) bad(path + ".capacity.max_concurrent", "max_concurrent >= 1");
    if (n.profile.capacity.state_capacity < 0) bad(path + ".capacity.state_capacity", "state_capacity >= 0");
  }
  std::set<std::string> links;
  for (std::size_t i = 0; i < s.links.size(); ++i) {
    const auto& l = s.links[i];
    const auto path = idx("$.topology.links", i);
    if (!links.insert(l.link_id).second) bad(path + ".link_id", "duplicate link");
    if (!vertices.count(l.a)) bad(path + ".a", "unknown endpoint '" + l.a + "'");
    if (!vertices.count(l.b)) bad(path + ".b", "unknown endpoint '" + l.b + "'");
    if (l.propagation_delay < 0) bad(path + ".propagation_delay", "propagation_delay >= 0");
    if (l.bandwidth <= 0) bad(path + ".bandwidth", "bandwidth > 0");
  }

  std::set<std::string> classes;
  for (std::size_t i = 0; i < s.classes.size(); ++i) {
    const auto path = idx("$.catalog.classes", i);
    if (!classes.insert(s.classes[i].name).second) bad(path + ".name", "duplicate class");
    append(validate_descriptor(s.classes[i], path));
  }
  std::map<std::string, const CapabilityVariant*> variants;
  for (std::size_t i = 0; i < s.variants.size(); ++i) {
    const auto& v = s.variants[i];
    const auto path = idx("$.catalog.variants", i);
    if (!variants.emplace(v.variant_id, &v).second) bad(path + ".variant_id", "duplicate variant");
    if (!classes.count(v.class_name)) bad(path + ".class_name", "unknown class '" + v.class_name + "'");
    append(validate_descriptor(v, path));
  }
  std::map<std::string, const CapabilityRealization*> realizations;
  for (std::size_t i = 0; i < s.realizations.size(); ++i) {
    const auto& r = s.realizations[i];
    const auto path = idx("$.catalog.realizations", i);
    if (!realizations.emplace(r.realization_id, &r).second) {
      bad(path + ".realization_id", "duplicate realization");
    }
    if (!variants.count(r.variant_id)) bad(path + ".variant_id", "unknown variant '" + r.variant_id + "'");
    append(validate_descriptor(r, path));
  }

  std::map<std::string, Bytes> placed_memory;
  std::set<std::pair<std::string, std::string>> placed;
  for (std::size_t i = 0; i < s.initial_placement.size(); ++i) {
    const auto& e = s.initial_placement[i];
    const auto path = idx("$.initial_placement", i);
    auto r = realizations.find(e.realization_id);
    auto n = nodes.find(e.node_id);
    if (r == realizations.end()) {
      bad(path + ".realization_id", "unknown realization '" + e.realization_id + "'");
    }
    if (n == nodes.end()) bad(path + ".node_id", "unknown node '" + e.node_id + "'");
    if (r == realizations.end() || n == nodes.end()) continue;
    if (!placed.emplace(e.realization_id, e.node_id).second) bad(path, "duplicate placement");
    const auto& prof = n->second->profile;
    if (prof.hardware.accelerator != r->second->accelerator) bad(path, "accelerator mismatch");
    auto v = variants.find(r->second->variant_id);
    if (v != variants.end() && prof.trust < v->second->security.min_trust) {
      bad(path, "node trust below the variant's hosting minimum");
    }
    placed_memory[e.node_id] += r->second->memory;
    if (placed_memory[e.node_id] > prof.capacity.memory_budget) {
      bad(path, "placements exceed the node memory budget");
    }
  }

  auto check_policy = [&](const PolicyConstraint& p, const std::string& path) {
    append(validate_descriptor(p, path));
    for (std::size_t k = 0; k < p.allowed_domains.size(); ++k) {
      if (!domains.count(p.allowed_domains[k])) {
        bad(idx(path + ".allowed_domains", k), "unknown domain '" + p.allowed_domains[k] + "'");
      }
    }
    if (p.preferred_domain && !domains.count(*p.preferred_domain)) {
      bad(path + ".preferred_domain", "unknown domain '" + *p.preferred_domain + "'");
    }
    if (p.locality_scope == LocalityScope::kDomain && p.allowed_domains.empty()) {
      bad(path + ".allowed_domains", "domain scope needs allowed_domains");
    }
  };

  for (std::size_t i = 0; i < s.workload.regions.size(); ++i) {
    const auto& w = s.workload.regions[i];
    const auto path = idx("$.workload.regions", i);
    if (!regions.count(w.region)) bad(path + ".region", "unknown region '" + w.region + "'");
    if (w.rate < 0.0) bad(path + ".rate", "rate >= 0");
    if (w.zipf_s < 0.0) bad(path + ".zipf_s", "zipf_s >= 0");
    if (!(w.turn_stop > 0.0 && w.turn_stop <= 1.0)) bad(path + ".turn_stop", "turn_stop in (0, 1]");
    if (w.prefix_tokens < 0) bad(path + ".prefix_tokens", "prefix_tokens >= 0");
    if (w.think_time <= 0) bad(path + ".think_time", "think_time > 0");
    if (w.input.sigma < 0.0) bad(path + ".input.sigma", "sigma >= 0");
    if (w.output.sigma < 0.0) bad(path + ".output.sigma", "sigma >= 0");
    if (w.rate > 0.0 && w.classes.empty()) bad(path + ".classes", "a region with demand needs classes");
    for (std::size_t k = 0; k < w.classes.size(); ++k) {
      if (!classes.count(w.classes[k])) bad(idx(path + ".classes", k), "unknown class '" + w.classes[k] + "'");
    }
    for (std::size_t k = 0; k < w.policies.size(); ++k) {
      const auto tp = idx(path + ".policies", k);
      if (w.policies[k].weight < 0.0) bad(tp + ".weight", "weight >= 0");
      if (w.policies[k].quality_target < 1) bad(tp + ".quality_target", "quality_target >= 1");
      if (w.policies[k].budget && *w.policies[k].budget < 0.0) bad(tp + ".budget", "budget >= 0");
      check_policy(w.policies[k].policy, tp + ".policy");
    }
    for (std::size_t k = 0; k < w.surges.size(); ++k) {
      const auto& sg = w.surges[k];
      if (sg.end < sg.start || sg.multiplier < 0.0) {
        bad(idx(path + ".surges", k), "surge needs start <= end and multiplier >= 0");
      }
    }
  }

  std::set<std::string> request_ids;
  for (std::size_t i = 0; i < s.requests.size(); ++i) {
    const auto& q = s.requests[i];
    const auto path = idx("$.requests", i);
    append(validate_descriptor(q, path));
    if (!request_ids.insert(q.request_id).second) bad(path + ".request_id", "duplicate request");
    if (!classes.count(q.capability_class)) {
      bad(path + ".capability_class", "unknown class '" + q.capability_class + "'");
    }
    if (!regions.count(q.origin_region)) bad(path + ".origin_region", "unknown region '" + q.origin_region + "'");
    if (q.arrival_time < 0 || q.arrival_time >= s.duration) {
      bad(path + ".arrival_time", "arrival_time within [0, duration)");
    }
    check_policy(q.policy, path + ".policy");
  }

  const auto& rt = s.routing;
  const auto& w = rt.weights;
  if (w.alpha < 0 || w.beta < 0 || w.gamma < 0 || w.delta < 0 || w.epsilon < 0 || w.zeta < 0) {
    bad("$.routing.weights", "all weights >= 0");
  }
  if (rt.load_penalty < 0) bad("$.routing.load_penalty", "load_penalty >= 0");
  if (rt.policy_penalty < 0) bad("$.routing.policy_penalty", "policy_penalty >= 0");
  if (rt.tie_epsilon < 0) bad("$.routing.tie_epsilon", "tie_epsilon >= 0");
  if (rt.bytes_per_token < 0) bad("$.routing.bytes_per_token", "bytes_per_token >= 0");
  if (rt.admission_cap && *rt.admission_cap < 1) bad("$.routing.admission_cap", "admission_cap >= 1");
  if (!rt.repository.empty() && !vertices.count(rt.repository)) {
    bad("$.routing.repository", "unknown vertex '" + rt.repository + "'");
  }

  const auto& pw = s.placement.weights;
  if (pw.deploy < 0 || pw.network < 0 || pw.risk < 0 || pw.storage_unit_cost < 0) {
    bad("$.placement", "placement weights >= 0");
  }
  if (pw.miss_penalty <= 0) bad("$.placement.miss_penalty", "miss_penalty > 0");
  if (s.placement.epoch <= 0) bad("$.placement.epoch", "epoch > 0");
  if (s.placement.window <= 0) bad("$.placement.window", "window > 0");
  if (s.placement.max_rounds < 0) bad("$.placement.max_rounds", "max_rounds >= 0");
  if (s.cache.reuse_window <= 0) bad("$.cache.reuse_window", "reuse_window > 0");
  if (s.cache.storage_unit_cost < 0) bad("$.cache.storage_unit_cost", "storage_unit_cost >= 0");
  if (s.session_linger < 0) bad("$.session_linger", "session_linger >= 0");

  for (std::size_t i = 0; i < s.attestations.size(); ++i) {
    const auto& a = s.attestations[i];
    const auto path = idx("$.trust.attestations", i);
    if (!nodes.count(a.node_id)) bad(path + ".node_id", "unknown node '" + a.node_id + "'");
    if (a.trust < kMinTrust || a.trust > kMaxTrust) bad(path + ".trust", "trust in [0, 3]");
    if (a.validity < 0) bad(path + ".validity", "validity >= 0");
    if (a.issue_time < 0) bad(path + ".issue_time", "issue_time >= 0");
  }
  for (std::size_t i = 0; i < s.revocations.size(); ++i) {
    const auto path = idx("$.trust.revocations", i);
    if (!realizations.count(s.revocations[i].realization_id)) {
      bad(path + ".realization_id", "unknown realization '" + s.revocations[i].realization_id + "'");
    }
    if (s.revocations[i].at < 0) bad(path + ".at", "at >= 0");
  }
  for (std::size_t i = 0; i < s.node_events.size(); ++i) {
    const auto path = idx("$.node_events", i);
    if (!nodes.count(s.node_events[i].node_id)) {
      bad(path + ".node_id", "unknown node '" + s.node_events[i].node_id + "'");
    }
    if (s.node_events[i].at < 0) bad(path + ".at", "at >= 0");
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdnError(ErrorCode::kParseError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Scenario load_scenario(const std::string& path) {
  return scenario_from_json(parse_json_text(read_file(path)));
}

}  // namespace idn
