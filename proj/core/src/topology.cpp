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

#include "idn/topology.h"

#include <algorithm>
#include <limits>
#include <optional>
#include <set>
#include <tuple>

namespace idn {
namespace {

struct Label {
  Micros delay = 0;
  std::vector<std::string> link_ids;
  std::vector<std::size_t> links;

  bool operator<(const Label& o) const {
    return std::tie(delay, link_ids) < std::tie(o.delay, o.link_ids);
  }
};

}  // namespace

Micros transfer_time(const Path& path, Bytes payload_bytes) {
  if (path.empty()) return 0;
  return path.delay + ceil_div(payload_bytes, path.min_bandwidth);
}

Bytes core_bytes(const Path& path, Bytes payload_bytes) {
  return payload_bytes * path.core_links;
}

Topology::Topology(std::vector<RegionId> regions, std::vector<Node> nodes,
                   std::vector<Domain> domains, std::vector<Link> links)
    : regions_(std::move(regions)),
      nodes_(std::move(nodes)),
      domains_(std::move(domains)),
      links_(std::move(links)) {
  auto add_vertex = [&](const std::string& id, const std::string& what) {
    if (!vertex_index_.emplace(id, vertices_.size()).second) {
      throw IdnError(ErrorCode::kScenarioInvalid, "duplicate " + what + " id '" + id + "'");
    }
    vertices_.push_back(id);
  };
  for (const auto& r : regions_) add_vertex(r, "region");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    add_vertex(nodes_[i].node_id, "node");
    node_index_[nodes_[i].node_id] = i;
  }
  for (std::size_t i = 0; i < domains_.size(); ++i) {
    if (!domain_index_.emplace(domains_[i].domain_id, i).second) {
      throw IdnError(ErrorCode::kScenarioInvalid,
                     "duplicate domain id '" + domains_[i].domain_id + "'");
    }
    domains_[i].members.clear();
  }
  for (const auto& n : nodes_) {
    auto it = domain_index_.find(n.profile.domain_id);
    if (it == domain_index_.end()) {
      throw IdnError(ErrorCode::kUnknownDomain,
                     "node '" + n.node_id + "' names domain '" + n.profile.domain_id + "'");
    }
    domains_[it->second].members.push_back(n.node_id);
  }
  std::set<std::string> link_ids;
  for (const auto& l : links_) {
    if (!link_ids.insert(l.link_id).second) {
      throw IdnError(ErrorCode::kScenarioInvalid, "duplicate link id '" + l.link_id + "'");
    }
    if (!has_vertex(l.a) || !has_vertex(l.b)) {
      throw IdnError(ErrorCode::kScenarioInvalid,
                     "link '" + l.link_id + "' has an unknown endpoint");
    }
    if (l.propagation_delay < 0 || l.bandwidth <= 0) {
      throw IdnError(ErrorCode::kScenarioInvalid,
                     "link '" + l.link_id + "' needs delay >= 0 and bandwidth > 0");
    }
  }
  compute_paths();
}

void Topology::compute_paths() {
  const std::size_t n = vertices_.size();
  std::vector<std::vector<std::size_t>> adjacency(n);
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const auto a = vertex_index_.at(links_[i].a);
    const auto b = vertex_index_.at(links_[i].b);
    adjacency[a].push_back(i);
    if (b != a) adjacency[b].push_back(i);
  }

  paths_.assign(n, {});
  for (std::size_t src = 0; src < n; ++src) {
    std::vector<std::optional<Label>> best(n);
    std::set<std::pair<Label, std::size_t>> frontier;
    best[src] = Label{};
    frontier.insert({*best[src], src});
    while (!frontier.empty()) {
      auto [label, v] = *frontier.begin();
      frontier.erase(frontier.begin());
      for (std::size_t li : adjacency[v]) {
        const Link& link = links_[li];
        const std::size_t w = vertex_index_.at(link.a == vertices_[v] ? link.b : link.a);
        Label next = label;
        next.delay += link.propagation_delay;
        next.link_ids.push_back(link.link_id);
        next.links.push_back(li);
        if (!best[w] || next < *best[w]) {
          if (best[w]) frontier.erase({*best[w], w});
          best[w] = next;
          frontier.insert({next, w});
        }
      }
    }
    for (std::size_t dst = 0; dst < n; ++dst) {
      if (!best[dst]) continue;
      Path p;
      p.delay = best[dst]->delay;
      p.link_ids = best[dst]->link_ids;
      p.min_bandwidth = p.link_ids.empty() ? 0 : std::numeric_limits<Bytes>::max();
      for (std::size_t li : best[dst]->links) {
        p.min_bandwidth = std::min(p.min_bandwidth, links_[li].bandwidth);
        if (links_[li].is_core) ++p.core_links;
      }
      paths_[src].emplace(dst, std::move(p));
    }
  }
}

const Path& Topology::path(const std::string& src, const std::string& dst) const {
  auto s = vertex_index_.find(src);
  auto d = vertex_index_.find(dst);
  if (s == vertex_index_.end() || d == vertex_index_.end()) {
    throw IdnError(ErrorCode::kUnreachable, "unknown endpoint '" +
                                                (s == vertex_index_.end() ? src : dst) + "'");
  }
  const auto& row = paths_[s->second];
  auto it = row.find(d->second);
  if (it == row.end()) {
    throw IdnError(ErrorCode::kUnreachable, "no path from '" + src + "' to '" + dst + "'");
  }
  return it->second;
}

bool Topology::connected(const std::string& src, const std::string& dst) const {
  auto s = vertex_index_.find(src);
  auto d = vertex_index_.find(dst);
  if (s == vertex_index_.end() || d == vertex_index_.end()) return false;
  return paths_[s->second].count(d->second) != 0;
}

bool Topology::has_region(const RegionId& id) const {
  return std::find(regions_.begin(), regions_.end(), id) != regions_.end();
}

const Node& Topology::node(const NodeId& id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) throw IdnError(ErrorCode::kUnknownNode, id);
  return nodes_[it->second];
}

const Domain& Topology::domain(const DomainId& id) const {
  auto it = domain_index_.find(id);
  if (it == domain_index_.end()) throw IdnError(ErrorCode::kUnknownDomain, id);
  return domains_[it->second];
}

Topology Topology::without_link(const std::string& link_id) const {
  std::vector<Link> kept;
  for (const auto& l : links_) {
    if (l.link_id != link_id) kept.push_back(l);
  }
  return Topology(regions_, nodes_, domains_, std::move(kept));
}

}  // namespace idn
