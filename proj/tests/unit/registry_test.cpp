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

#include <gtest/gtest.h>

#include <random>

#include "fixtures.h"
#include "idn/registry.h"
#include "oracles.h"

namespace idn {
namespace {

using testing::make_link;
using testing::make_profile;
using testing::make_realization;

constexpr Bytes kGB = 1'000'000'000;

Node node(const ResourceProfile& p) {
  Node n;
  n.node_id = p.node_id;
  n.profile = p;
  return n;
}

// Three nodes in two domains: a fast cloud node and two edge nodes.
struct SmallWorld {
  SmallWorld() {
    profiles = {
        make_profile("cloud", "provider", "central", Tier::kCloud, "a100", 2.0, 4, 80 * kGB, 3),
        make_profile("edge-a", "metro", "east", Tier::kEdge, "l4", 1.0, 2, 24 * kGB, 2),
        make_profile("edge-b", "metro", "west", Tier::kEdge, "l4", 1.0, 1, 24 * kGB, 1),
    };
    std::vector<Node> nodes;
    for (const auto& p : profiles) nodes.push_back(node(p));
    Domain provider{"provider", {}, 2, ""};
    Domain metro{"metro", {}, 1, ""};
    Domain empty{"empty", {}, 0, ""};
    topology = std::make_unique<Topology>(
        std::vector<RegionId>{"central", "east", "west"}, nodes,
        std::vector<Domain>{provider, metro, empty},
        std::vector<Link>{make_link("c", "central", "cloud", 500, 1000),
                          make_link("e", "east", "edge-a", 2000, 100),
                          make_link("w", "west", "edge-b", 2000, 100),
                          make_link("ec", "edge-a", "cloud", 20000, 100, true),
                          make_link("wc", "edge-b", "cloud", 20000, 100, true)});

    CapabilityDescriptor chat;
    chat.name = "chat";
    chat.task = "text-generation";
    chat.lineage = {{"base", "tuned"}};
    catalog.add_class(chat);
    catalog.add_variant({"chat-small", "chat", 1, 0, {1, 1, DataClass::kTenant}});
    catalog.add_variant({"chat-large", "chat", 2, 0, {2, 3, DataClass::kPrivate}});
    catalog.add_realization(make_realization("small-l4", "chat-small", "l4", 8 * kGB, 100, 20));
    catalog.add_realization(make_realization("small-a100", "chat-small", "a100", 8 * kGB, 50, 10));
    catalog.add_realization(make_realization("large-a100", "chat-large", "a100", 40 * kGB, 80, 15));
    broker = std::make_unique<ResourceBroker>(*topology, catalog);
    for (const auto& p : profiles) broker->register_node(p);
  }

  std::vector<ResourceProfile> profiles;
  std::unique_ptr<Topology> topology;
  CapabilityCatalog catalog;
  std::unique_ptr<ResourceBroker> broker;
};

NodeTelemetry telemetry(Micros queued, Bytes free_memory,
                        std::vector<Residency> resident = {}) {
  NodeTelemetry t;
  t.queued_work = queued;
  t.free_memory = free_memory;
  t.resident = std::move(resident);
  return t;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const IdnError& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an IdnError";
  return ErrorCode::kInvariantViolation;
}

TEST(RegisterNode, AdmitsAndRejects) {
  SmallWorld w;
  EXPECT_TRUE(w.broker->has_node("edge-a"));
  EXPECT_EQ(code_of([&] { w.broker->register_node(w.profiles[1]); }), ErrorCode::kDuplicateNode);

  auto low = make_profile("weak", "provider", "central", Tier::kCloud, "a100", 1.0, 1, kGB, 0);
  EXPECT_EQ(code_of([&] { w.broker->register_node(low); }), ErrorCode::kTrustBelowDomainFloor);

  auto stray = make_profile("stray", "nowhere", "central", Tier::kCloud, "a100", 1.0, 1, kGB, 3);
  EXPECT_EQ(code_of([&] { w.broker->register_node(stray); }), ErrorCode::kUnknownDomain);
}

TEST(Telemetry, UnknownNodeAndOverBudgetAreRejected) {
  SmallWorld w;
  EXPECT_EQ(code_of([&] { w.broker->update_telemetry("ghost", telemetry(0, 0)); }),
            ErrorCode::kUnknownNode);
  EXPECT_EQ(code_of([&] { w.broker->update_telemetry("edge-a", telemetry(0, 25 * kGB)); }),
            ErrorCode::kInvariantViolation);
}

TEST(Summary, EmptyDomainIsZeroed) {
  SmallWorld w;
  const auto s = w.broker->summarize("empty");
  EXPECT_EQ(s.online_nodes, 0);
  EXPECT_EQ(s.free_memory, 0);
  EXPECT_EQ(s.queue_estimate, 0);
  EXPECT_TRUE(s.classes.empty());
}

TEST(Summary, QueueEstimateIsConcurrencyWeightedMean) {
  SmallWorld w;
  // Equal concurrency gives the plain mean.
  auto p = make_profile("edge-c", "metro", "east", Tier::kEdge, "l4", 1.0, 2, 24 * kGB, 2);
  w.broker->register_node(p);
  w.broker->set_online("edge-b", false);
  w.broker->update_telemetry("edge-a", telemetry(1000, 24 * kGB));
  w.broker->update_telemetry("edge-c", telemetry(3000, 24 * kGB));
  EXPECT_EQ(w.broker->summarize("metro").queue_estimate, 2000);

  // Weights 2 and 1: (2 * 1000 + 1 * 4000) / 3.
  w.broker->set_online("edge-b", true);
  w.broker->update_telemetry("edge-b", telemetry(4000, 24 * kGB));
  w.broker->set_online("edge-c", false);
  EXPECT_EQ(w.broker->summarize("metro").queue_estimate, 2000);
  w.broker->update_telemetry("edge-b", telemetry(7000, 24 * kGB));
  EXPECT_EQ(w.broker->summarize("metro").queue_estimate, 3000);
}

TEST(Summary, ZeroQueueAndLastWriterWins) {
  SmallWorld w;
  w.broker->update_telemetry("cloud", telemetry(5000, 80 * kGB));
  EXPECT_EQ(w.broker->summarize("provider").queue_estimate, 5000);
  w.broker->update_telemetry("cloud", telemetry(0, 80 * kGB));
  EXPECT_EQ(w.broker->summarize("provider").queue_estimate, 0);
}

TEST(Summary, OfflineNodesAreExcluded) {
  SmallWorld w;
  w.broker->update_telemetry("edge-a", telemetry(100, 10 * kGB, {{"small-l4", 0, false}}));
  w.broker->set_online("edge-b", false);
  const auto s = w.broker->summarize("metro");
  EXPECT_EQ(s.online_nodes, 1);
  EXPECT_EQ(s.free_memory, 10 * kGB);
  EXPECT_EQ(s.max_trust, 2);
  EXPECT_EQ(s.classes.at("chat").warm_count, 1);
  EXPECT_EQ(s.classes.at("chat").best_quality, 1);
}

TEST(Summary, MatchesRecomputeOracleUnderRandomTelemetry) {
  SmallWorld w;
  std::mt19937_64 rng(5);
  const std::vector<RealizationId> rids = {"small-l4", "small-a100", "large-a100"};
  for (int step = 0; step < 300; ++step) {
    const auto& p = w.profiles[rng() % w.profiles.size()];
    switch (rng() % 4) {
      case 0:
        w.broker->set_online(p.node_id, rng() % 3 != 0);
        break;
      case 1:
        w.broker->set_trust(p.node_id, static_cast<int>(rng() % 4));
        break;
      default: {
        NodeTelemetry t;
        t.queued_work = static_cast<Micros>(rng() % 100000);
        t.free_memory = static_cast<Bytes>(rng() % (p.capacity.memory_budget + 1));
        for (const auto& r : rids) {
          if (rng() % 2 && w.catalog.realization(r).accelerator == p.hardware.accelerator) {
            t.resident.push_back({r, 0, rng() % 5 == 0});
          }
        }
        w.broker->update_telemetry(p.node_id, t);
      }
    }
    for (const auto& d : {"provider", "metro", "empty"}) {
      ASSERT_EQ(w.broker->summarize(d), testing::reference_summary(*w.broker, d)) << step;
    }
  }
}

TEST(Lookup, NoNodeMeetsTrust) {
  SmallWorld w;
  PolicyConstraint policy;
  policy.min_trust = 3;
  policy.locality_scope = LocalityScope::kRegion;
  EXPECT_TRUE(w.broker->lookup_candidates("chat", 1, policy, "east").empty());
}

TEST(Lookup, SingleWarmNode) {
  SmallWorld w;
  w.broker->update_telemetry("edge-a", telemetry(0, 16 * kGB, {{"small-l4", 0, false}}));
  PolicyConstraint policy;
  policy.locality_scope = LocalityScope::kRegion;
  const auto c = w.broker->lookup_candidates("chat", 1, policy, "east");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0], (Candidate{"edge-a", "small-l4", true}));
}

TEST(Lookup, UnknownClassThrows) {
  SmallWorld w;
  EXPECT_EQ(code_of([&] { w.broker->lookup_candidates("vision", 1, {}, "east"); }),
            ErrorCode::kUnknownCapabilityClass);
}

TEST(Lookup, MatchesBruteForceFilter) {
  SmallWorld w;
  std::mt19937_64 rng(17);
  const std::vector<RealizationId> rids = {"small-l4", "small-a100", "large-a100"};
  for (int trial = 0; trial < 200; ++trial) {
    for (const auto& p : w.profiles) {
      NodeTelemetry t;
      t.free_memory = static_cast<Bytes>(rng() % (p.capacity.memory_budget + 1));
      for (const auto& r : rids) {
        if (rng() % 3 == 0 && w.catalog.realization(r).accelerator == p.hardware.accelerator) {
          t.resident.push_back({r, 0, rng() % 4 == 0});
        }
      }
      w.broker->update_telemetry(p.node_id, t);
      w.broker->set_online(p.node_id, rng() % 5 != 0);
    }
    PolicyConstraint policy;
    policy.min_trust = static_cast<int>(rng() % 4);
    policy.locality_scope = static_cast<LocalityScope>(rng() % 3);
    if (policy.locality_scope == LocalityScope::kDomain || rng() % 3 == 0) {
      policy.allowed_domains = {rng() % 2 ? "metro" : "provider"};
    }
    policy.data_class = static_cast<DataClass>(rng() % 3);
    const int quality = 1 + static_cast<int>(rng() % 2);
    const RegionId origin = std::vector<RegionId>{"central", "east", "west"}[rng() % 3];
    auto got = w.broker->lookup_candidates("chat", quality, policy, origin);
    std::sort(got.begin(), got.end());
    ASSERT_EQ(got, testing::reference_candidates(*w.broker, "chat", quality, policy, origin))
        << trial;
  }
}

bool subset(const std::vector<Candidate>& a, const std::vector<Candidate>& b) {
  return std::all_of(a.begin(), a.end(), [&](const Candidate& c) {
    return std::find(b.begin(), b.end(), c) != b.end();
  });
}

TEST(Lookup, RelaxingPolicyNeverShrinksTheSet) {
  SmallWorld w;
  for (const auto& p : w.profiles) {
    w.broker->update_telemetry(p.node_id, telemetry(0, p.capacity.memory_budget / 2));
  }
  for (const RegionId origin : {"central", "east", "west"}) {
    for (int trust = 3; trust > 0; --trust) {
      PolicyConstraint strict;
      strict.min_trust = trust;
      strict.locality_scope = LocalityScope::kRegion;
      PolicyConstraint looser = strict;
      looser.min_trust = trust - 1;
      PolicyConstraint widest = looser;
      widest.locality_scope = LocalityScope::kAny;
      const auto a = w.broker->lookup_candidates("chat", 1, strict, origin);
      const auto b = w.broker->lookup_candidates("chat", 1, looser, origin);
      const auto c = w.broker->lookup_candidates("chat", 1, widest, origin);
      EXPECT_TRUE(subset(a, b));
      EXPECT_TRUE(subset(b, c));
    }
  }
}

TEST(Catalog, RemovalCascadesAndKeepsIntegrity) {
  SmallWorld w;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    CapabilityCatalog c = w.catalog;
    for (int step = 0; step < 4; ++step) {
      switch (rng() % 3) {
        case 0:
          if (c.has_class("chat")) c.remove_class("chat");
          break;
        case 1:
          if (c.has_variant("chat-small")) c.remove_variant("chat-small");
          break;
        default:
          if (c.has_realization("large-a100")) c.remove_realization("large-a100");
      }
      EXPECT_TRUE(c.check_integrity());
    }
  }
  CapabilityCatalog c = w.catalog;
  c.remove_class("chat");
  EXPECT_TRUE(c.variants().empty());
  EXPECT_TRUE(c.realizations().empty());
}

TEST(Catalog, DanglingParentsAreRefused) {
  CapabilityCatalog c;
  EXPECT_EQ(code_of([&] { c.add_variant({"v", "nope", 1, 0, {}}); }),
            ErrorCode::kUnknownCapabilityClass);
  EXPECT_EQ(code_of([&] { c.add_realization(make_realization("r", "nope", "l4", 1, 1, 1)); }),
            ErrorCode::kUnknownVariant);
}

TEST(Catalog, LineageDigestDependsOnTheChain) {
  SmallWorld w;
  const auto a = w.catalog.lineage_digest("small-l4");
  EXPECT_EQ(a, w.catalog.lineage_digest("small-l4"));
  EXPECT_NE(a, w.catalog.lineage_digest("small-a100"));
}

}  // namespace
}  // namespace idn
