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

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "idn/descriptors.h"

namespace idn {

struct Node {
  NodeId node_id;
  ResourceProfile profile;  // static part; live state lives in the broker
  bool online = true;
};

struct Domain {
  DomainId domain_id;
  std::vector<NodeId> members;
  int admission_floor = 0;  // min trust a node needs to join
  std::string operator_tag;
};

// Undirected link between two vertices. A vertex is a node id or a region
// gateway id.
struct Link {
  std::string link_id;
  std::string a;
  std::string b;
  Micros propagation_delay = 0;
  Bytes bandwidth = 1;  // bytes per microsecond
  bool is_core = false;
};

struct Path {
  std::vector<std::string> link_ids;
  Micros delay = 0;
  Bytes min_bandwidth = 0;  // 0 for the empty path
  int core_links = 0;

  bool empty() const { return link_ids.empty(); }
};

// Sum of propagation delays plus serialization at the bottleneck bandwidth,
// rounded up.
Micros transfer_time(const Path& path, Bytes payload_bytes);

// Payload counted once per wide-area link crossed.
Bytes core_bytes(const Path& path, Bytes payload_bytes);

class CoreTrafficMeter {
 public:
  void record(const Path& path, Bytes payload_bytes) {
    total_ += core_bytes(path, payload_bytes);
  }
  Bytes total() const { return total_; }

 private:
  Bytes total_ = 0;
};

// Immutable after construction. Shortest paths are precomputed for every
// vertex pair so lookups are const and thread-safe.
class Topology {
 public:
  Topology() = default;
  Topology(std::vector<RegionId> regions, std::vector<Node> nodes, std::vector<Domain> domains,
           std::vector<Link> links);

  // Minimum propagation-delay path; ties go to the lexicographically smallest
  // link-id sequence. Throws IdnError(kUnreachable).
  const Path& path(const std::string& src, const std::string& dst) const;
  bool connected(const std::string& src, const std::string& dst) const;

  bool has_node(const NodeId& id) const { return node_index_.count(id) != 0; }
  bool has_region(const RegionId& id) const;
  bool has_domain(const DomainId& id) const { return domain_index_.count(id) != 0; }
  bool has_vertex(const std::string& id) const { return vertex_index_.count(id) != 0; }

  const Node& node(const NodeId& id) const;
  const Domain& domain(const DomainId& id) const;

  const std::vector<RegionId>& regions() const { return regions_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Domain>& domains() const { return domains_; }
  const std::vector<Link>& links() const { return links_; }

  // Copy of this topology without the named link.
  Topology without_link(const std::string& link_id) const;

 private:
  void compute_paths();

  std::vector<RegionId> regions_;
  std::vector<Node> nodes_;
  std::vector<Domain> domains_;
  std::vector<Link> links_;
  std::map<NodeId, std::size_t> node_index_;
  std::map<DomainId, std::size_t> domain_index_;
  std::map<std::string, std::size_t> vertex_index_;
  std::vector<std::string> vertices_;
  // paths_[src][dst]; absent when unreachable.
  std::vector<std::map<std::size_t, Path>> paths_;
};

}  // namespace idn
