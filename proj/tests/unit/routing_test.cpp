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
#include "idn/routing.h"
#include "oracles.h"

namespace idn {
namespace {

using testing::make_link;
using testing::make_profile;
using testing::make_realization;

constexpr Bytes kGB = 1'000'000'000;

// A fast cloud node behind two identical east edges.
struct RouteWorld {
  explicit RouteWorld(RoutingConfig config = default_config()) {
    profiles = {
        make_profile("cloud", "provider", "central", Tier::kCloud, "a100", 2.0, 4, 80 * kGB, 3),
        make_profile("edge-a", "metro", "east", Tier::kEdge, "l4", 1.0, 2, 24 * kGB, 2),
        make_profile("edge-b", "metro", "east", Tier::kEdge, "l4", 1.0, 2, 24 * kGB, 2),
    };
    std::vector<Node> nodes;
    for (const auto& p : profiles) nodes.push_back({p.node_id, p, true});
    topology = std::make_unique<Topology>(
        std::vector<RegionId>{"central", "east"}, nodes,
        std::vector<Domain>{{"provider", {}, 0, ""}, {"metro", {}, 0, ""}},
        std::vector<Link>{make_link("c", "central", "cloud", 500, 1000),
                          make_link("ea", "east", "edge-a", 2000, 100),
                          make_link("eb", "east", "edge-b", 2000, 100),
                          make_link("ac", "edge-a", "cloud", 20000, 100, true),
                          make_link("bc", "edge-b", "cloud", 20000, 100, true)});

    CapabilityDescriptor chat;
    chat.name = "chat";
    chat.task = "text-generation";
    chat.lineage = {{"base", "tuned"}};
    catalog.add_class(chat);
    catalog.add_variant({"small", "chat", 1, 0, {1, 2, DataClass::kPrivate}});
    catalog.add_variant({"large", "chat", 2, 0, {3, 3, DataClass::kPrivate}});
    auto small_l4 = make_realization("small-l4", "small", "l4", 8 * kGB, 200, 30);
    small_l4.kv_bytes_per_token = 100;
    small_l4.setup_time = 700;
    auto small_a100 = make_realization("small-a100", "small", "a100", 8 * kGB, 200, 30);
    small_a100.kv_bytes_per_token = 100;
    small_a100.setup_time = 700;
    small_a100.load_time = 3'000'000;
    auto large = make_realization("large-a100", "large", "a100", 40 * kGB, 300, 50);
    catalog.add_realization(small_l4);
    catalog.add_realization(small_a100);
    catalog.add_realization(large);

    broker = std::make_unique<ResourceBroker>(*topology, catalog);
    for (const auto& p : profiles) broker->register_node(p);
    for (const auto& p : profiles) cache.add_node(p.node_id, p.capacity.state_capacity);
    set_node("cloud", {"small-a100"});
    set_node("edge-a", {"small-l4"});
    set_node("edge-b", {"small-l4"});
    router = std::make_unique<Router>(*broker, &cache, config);
  }

  static RoutingConfig default_config() {
    RoutingConfig c;
    c.repository = "central";
    c.load_penalty = 10'000;
    c.policy_penalty = 5'000;
    return c;
  }

  void set_node(const NodeId& id, const std::vector<RealizationId>& resident, Micros queued = 0,
                int running = 0, int queue_length = 0) {
    NodeTelemetry t;
    t.queued_work = queued;
    t.running = running;
    t.queue_length = queue_length;
    t.free_memory = broker->profile(id).capacity.memory_budget;
    for (const auto& r : resident) {
      t.resident.push_back({r, 0, false});
      t.free_memory -= catalog.realization(r).memory;
    }
    broker->update_telemetry(id, t);
  }

  std::vector<ResourceProfile> profiles;
  std::unique_ptr<Topology> topology;
  CapabilityCatalog catalog;
  std::unique_ptr<ResourceBroker> broker;
  CacheManager cache;
  std::unique_ptr<Router> router;
};

RequestDescriptor request(int input = 100, int output = 10) {
  RequestDescriptor q;
  q.request_id = "q";
  q.capability_class = "chat";
  q.quality_target = 1;
  q.origin_region = "east";
  q.input_tokens = input;
  q.output_tokens = output;
  q.tenant_id = "t";
  q.session_id = "s";
  return q;
}

std::vector<std::vector<PlanStage>> stage_lists(std::vector<ExecutionPlan> plans) {
  std::vector<std::vector<PlanStage>> out;
  for (auto& p : plans) out.push_back(std::move(p.stages));
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    auto key = [](const std::vector<PlanStage>& s) {
      std::string k;
      for (const auto& st : s) {
        k += st.node_id + "|" + st.realization_id + "|" + std::string(to_string(st.phase)) + ";";
      }
      return k;
    };
    return key(x) < key(y);
  });
  return out;
}

TEST(Score, WeightedSumOfTheSixTerms) {
  TimingBreakdown t{5, 10, 20, 0, 3, 0, 0.0};
  EXPECT_DOUBLE_EQ(weighted_total(t, RoutingWeights{}), 38.0);
  RoutingWeights w{2, 1, 1, 1, 1, 1};
  EXPECT_DOUBLE_EQ(weighted_total(t, w), 43.0);
}

TEST(Score, IdleWarmNodeCostsSetupAndOneDecodeStep) {
  auto config = RouteWorld::default_config();
  config.bytes_per_token = 0;
  config.weights.gamma = 3.0;
  RouteWorld w(config);
  ExecutionPlan plan;
  plan.stages = {{"cloud", "small-a100", Phase::kFull}};
  auto q = request(0, 1);
  q.origin_region = "cloud";  // empty inbound and response paths
  const auto cost = w.router->score(plan, q, 0);
  EXPECT_EQ(cost.terms.t_net, 0);
  EXPECT_EQ(cost.terms.t_queue, 0);
  EXPECT_EQ(cost.terms.t_state, 0);
  EXPECT_EQ(cost.terms.c_load, 0);
  EXPECT_EQ(cost.terms.p_policy, 0);
  // 700 setup plus ceil(30 / 2) for the single token.
  EXPECT_EQ(cost.terms.t_exec, 715);
  EXPECT_DOUBLE_EQ(cost.terms.total, 3.0 * 715);
}

TEST(Score, SplitPlanChargesKvTransfer) {
  RouteWorld w;
  ExecutionPlan plan;
  plan.stages = {{"cloud", "small-a100", Phase::kPrefill}, {"edge-a", "small-l4", Phase::kDecode}};
  const auto q = request(100, 10);
  const auto cost = w.router->score(plan, q, 0);
  // 100 tokens * 100 bytes over the 20000 us core link at 100 bytes/us.
  EXPECT_EQ(cost.kv_transfer, 20000 + 100);
  EXPECT_EQ(cost.stages[0].prefill, 100 * 200 / 2);
  EXPECT_EQ(cost.stages[0].per_output_token, 0);
  EXPECT_EQ(cost.stages[1].prefill, 0);
  EXPECT_EQ(cost.stages[1].per_output_token, 30);
  const auto ref =
      testing::reference_score(*w.broker, &w.cache, w.router->config(), plan.stages, false, q, 0);
  EXPECT_EQ(cost.terms, ref);
}

TEST(Score, ColdPlanAddsArtifactFetchAndLoad) {
  RouteWorld w;
  w.set_node("cloud", {});
  const auto q = request();
  const auto plans = w.router->enumerate(q, 1);
  auto it = std::find_if(plans.begin(), plans.end(), [](const ExecutionPlan& p) {
    return p.stages[0].node_id == "cloud" && p.stages.size() == 1;
  });
  ASSERT_NE(it, plans.end());
  EXPECT_TRUE(it->cold);
  const auto cost = w.router->score(*it, q, 0);
  // 4 GB artifact over the 1000 bytes/us repository link plus load time.
  EXPECT_EQ(cost.stages[0].setup, 700 + 500 + 4'000'000 + 3'000'000);
}

TEST(Score, LocalStateCostsNothingRemoteStateCostsTheCheaperMove) {
  RouteWorld w;
  auto q = request(300, 10);
  q.affinity_token = "s/p";
  q.prefix_tokens = 200;
  q.prefix_digest = "p";
  const auto hash = compatibility_hash("small-l4", "default", q.decoding_config, q.prefix_digest);
  StateDescriptor s;
  s.state_id = "px";
  s.compatibility_hash = hash;
  s.sharing_scope = SharingScope::kSessionPrivate;
  s.privacy_label = DataClass::kTenant;
  s.size = 20'000;
  s.migration_cost = 20'000;
  const BenefitInputs in{0.5, 1e6, 0, 0, 0};
  ASSERT_TRUE(w.cache.admit("edge-a", 2, s, "small-l4", scope_key_of(q), 200, in, 0).admitted);

  ExecutionPlan local;
  local.stages = {{"edge-a", "small-l4", Phase::kFull}};
  const auto lc = w.router->score(local, q, 0);
  EXPECT_EQ(lc.terms.t_state, 0);
  EXPECT_TRUE(lc.state_local);
  EXPECT_EQ(lc.covered_tokens, 200);
  EXPECT_EQ(lc.stages[0].prefill, 100 * 200);

  ExecutionPlan remote;
  remote.stages = {{"edge-b", "small-l4", Phase::kFull}};
  const auto rc = w.router->score(remote, q, 0);
  // Moving through the east gateway costs 4000 + 200 against 40000 to
  // recompute 200 tokens.
  EXPECT_EQ(rc.terms.t_state, 4'200);
  EXPECT_TRUE(rc.state_migrate);
  EXPECT_EQ(rc.terms, testing::reference_score(*w.broker, &w.cache, w.router->config(),
                                               remote.stages, false, q, 0));

  // Another session cannot see it.
  q.session_id = "other";
  EXPECT_EQ(w.router->score(remote, q, 0).terms.t_state, 0);
}

TEST(Select, LowerTotalWins) {
  RouteWorld w;
  ScoredPlan a, b;
  a.plan.plan_id = "0000";
  a.cost.terms.total = 38;
  b.plan.plan_id = "ffff";
  b.cost.terms.total = 36;
  EXPECT_TRUE(w.router->better(b, a));
  EXPECT_FALSE(w.router->better(a, b));

  // Live: two extra microseconds of queue send the request to the other edge.
  w.set_node("edge-a", {"small-l4"}, 2);
  const auto sel = w.router->select(request(), 0);
  ASSERT_TRUE(sel.served);
  EXPECT_EQ(sel.plan.stages[0].node_id, "edge-b");
  w.set_node("edge-a", {"small-l4"}, 0);
  w.set_node("edge-b", {"small-l4"}, 2);
  EXPECT_EQ(w.router->select(request(), 0).plan.stages[0].node_id, "edge-a");
}

TEST(Select, EqualTotalsBreakTiesByPlanId) {
  RouteWorld w;
  const auto sel = w.router->select(request(), 0);
  ASSERT_TRUE(sel.served);
  const auto pa = plan_id_of({{"edge-a", "small-l4", Phase::kFull}});
  const auto pb = plan_id_of({{"edge-b", "small-l4", Phase::kFull}});
  EXPECT_EQ(sel.plan.plan_id, std::min(pa, pb));
  for (int i = 0; i < 5; ++i) EXPECT_EQ(w.router->select(request(), 0).plan, sel.plan);
  ScoredPlan x, y;
  x.plan.plan_id = "a";
  y.plan.plan_id = "b";
  x.cost.terms.total = 1e9;
  y.cost.terms.total = 1e9 * (1 - 1e-12);
  EXPECT_TRUE(w.router->better(x, y));
}

TEST(Select, NoCandidateIsNoFeasiblePlan) {
  RouteWorld w;
  auto q = request();
  q.policy.min_trust = 3;
  q.policy.locality_scope = LocalityScope::kRegion;
  EXPECT_TRUE(w.router->feasible_plans(q, 0).empty());
  const auto sel = w.router->select(q, 0);
  EXPECT_FALSE(sel.served);
  EXPECT_EQ(sel.reason, "NoFeasiblePlan");
}

TEST(Select, DegradableRequestStepsDownOneQuality) {
  RouteWorld w;
  auto q = request();
  q.quality_target = 2;
  q.policy.locality_scope = LocalityScope::kRegion;  // large lives only in the cloud
  EXPECT_EQ(w.router->select(q, 0).reason, "NoFeasiblePlan");
  q.degradable = true;
  const auto sel = w.router->select(q, 0);
  ASSERT_TRUE(sel.served);
  EXPECT_TRUE(sel.degraded);
  EXPECT_EQ(sel.quality, 1);
}

TEST(Select, BudgetFiltersAndNeverServesAboveIt) {
  RouteWorld w;
  auto q = request();
  const auto free = w.router->select(q, 0);
  ASSERT_TRUE(free.served);
  q.budget = free.cost.terms.total - 1;
  const auto sel = w.router->select(q, 0);
  if (sel.served) EXPECT_LE(sel.cost.terms.total, *q.budget);
  q.budget = 1.0;
  EXPECT_EQ(w.router->select(q, 0).reason, "BudgetExceeded");
  EXPECT_TRUE(w.router->feasible_plans(q, 0).empty());
}

TEST(Select, AdmissionCapExcludesFullNodes) {
  auto config = RouteWorld::default_config();
  config.admission_cap = 2;
  RouteWorld w(config);
  auto q = request();
  q.policy.locality_scope = LocalityScope::kRegion;
  w.set_node("edge-a", {"small-l4"}, 0, 2, 2);
  const auto sel = w.router->select(q, 0);
  ASSERT_TRUE(sel.served);
  EXPECT_EQ(sel.plan.stages[0].node_id, "edge-b");
  w.set_node("edge-b", {"small-l4"}, 0, 2, 2);
  EXPECT_EQ(w.router->select(q, 0).reason, "Overloaded");
}

TEST(Select, PreferredDomainMissIsPenalizedNotExcluded) {
  RouteWorld w;
  auto q = request();
  q.policy.preferred_domain = "provider";
  ExecutionPlan edge;
  edge.stages = {{"edge-a", "small-l4", Phase::kFull}};
  EXPECT_EQ(w.router->score(edge, q, 0).terms.p_policy, 5'000);
  EXPECT_TRUE(w.router->select(q, 0).served);
}

TEST(Enumerate, MatchesBruteForceAndEveryScoreMatchesReference) {
  RouteWorld w;
  std::mt19937_64 rng(23);
  const std::vector<std::vector<RealizationId>> residency = {
      {}, {"small-a100"}, {"large-a100"}, {"small-a100", "large-a100"}};
  for (int trial = 0; trial < 300; ++trial) {
    w.set_node("cloud", residency[rng() % 4], rng() % 50'000, rng() % 4, rng() % 3);
    for (const auto& e : {"edge-a", "edge-b"}) {
      w.set_node(e, rng() % 3 ? std::vector<RealizationId>{"small-l4"}
                              : std::vector<RealizationId>{},
                 rng() % 50'000, rng() % 3, rng() % 3);
      w.broker->set_online(e, rng() % 6 != 0);
    }
    auto q = request(static_cast<int>(rng() % 500), 1 + static_cast<int>(rng() % 50));
    q.quality_target = 1 + static_cast<int>(rng() % 2);
    q.policy.min_trust = static_cast<int>(rng() % 3);
    if (rng() % 2) q.policy.preferred_domain = "metro";
    const auto plans = w.router->enumerate(q, q.quality_target);
    ASSERT_EQ(stage_lists(plans),
              testing::reference_plans(*w.broker, w.router->config(), q, q.quality_target))
        << trial;
    for (const auto& p : plans) {
      ASSERT_EQ(w.router->score(p, q, 0).terms,
                testing::reference_score(*w.broker, &w.cache, w.router->config(), p.stages,
                                         p.cold, q, 0))
          << trial;
    }
    // The selected plan is never beaten by an independently rescored one.
    const auto sel = w.router->select(q, 0);
    if (!sel.served) continue;
    for (const auto& p : sel.considered) {
      const auto ref = testing::reference_score(*w.broker, &w.cache, w.router->config(),
                                                p.plan.stages, p.plan.cold, q, 0);
      EXPECT_GE(ref.total, sel.cost.terms.total * (1 - 1e-9));
    }
  }
}

TEST(Enumerate, SplitNeedsAFasterPrefillNodeAndACloserDecodeNode) {
  RouteWorld w;
  const auto plans = w.router->enumerate(request(), 1);
  int splits = 0;
  for (const auto& p : plans) {
    if (p.stages.size() != 2) continue;
    ++splits;
    EXPECT_EQ(p.stages[0].node_id, "cloud");
    EXPECT_EQ(p.stages[0].phase, Phase::kPrefill);
    EXPECT_EQ(p.stages[1].phase, Phase::kDecode);
  }
  EXPECT_EQ(splits, 2);
  auto config = RouteWorld::default_config();
  config.split_enabled = false;
  RouteWorld off(config);
  for (const auto& p : off.router->enumerate(request(), 1)) EXPECT_EQ(p.stages.size(), 1u);
}

TEST(Select, ScalingAllWeightsKeepsTheChoice) {
  RouteWorld w;
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    w.set_node("cloud", {"small-a100"}, rng() % 100'000, rng() % 3, rng() % 3);
    w.set_node("edge-a", {"small-l4"}, rng() % 100'000, rng() % 3, rng() % 3);
    w.set_node("edge-b", {"small-l4"}, rng() % 100'000, rng() % 3, rng() % 3);
    const auto q = request(static_cast<int>(rng() % 800), 1 + static_cast<int>(rng() % 100));
    const auto base = w.router->select(q, 0);
    for (double k : {1e-3, 0.5, 10.0, 1e6}) {
      const auto scaled = w.router->with_weights(w.router->config().weights.scaled(k)).select(q, 0);
      EXPECT_EQ(scaled.plan, base.plan) << trial << " x" << k;
    }
  }
}

TEST(Select, CachedStateAttractsTheRequest) {
  for (const NodeId holder : {"edge-a", "edge-b"}) {
    RouteWorld w;
    auto q = request(300, 10);
    q.affinity_token = "s/p";
    q.prefix_tokens = 200;
    q.prefix_digest = "p";
    StateDescriptor s;
    s.state_id = "px";
    s.compatibility_hash =
        compatibility_hash("small-l4", "default", q.decoding_config, q.prefix_digest);
    s.sharing_scope = SharingScope::kSessionPrivate;
    s.privacy_label = DataClass::kTenant;
    s.size = 20'000;
    s.migration_cost = 20'000;
    ASSERT_TRUE(
        w.cache.admit(holder, 2, s, "small-l4", scope_key_of(q), 200, {0.5, 1e6, 0, 0, 0}, 0)
            .admitted);
    EXPECT_EQ(w.router->select(q, 0).plan.stages[0].node_id, holder);
  }
}

TEST(Select, QuadraticLoadPenaltySpreadsSustainedLoad) {
  auto run = [](double kappa) {
    auto config = RouteWorld::default_config();
    config.load_penalty = kappa;
    RouteWorld w(config);
    std::map<NodeId, int> count;
    auto q = request();
    q.policy.locality_scope = LocalityScope::kRegion;
    for (int i = 0; i < 41; ++i) {
      const auto sel = w.router->select(q, 0);
      const auto& node = sel.plan.stages[0].node_id;
      ++count[node];
      // The request stays in flight, so the node's occupancy grows.
      w.set_node(node, {"small-l4"}, 0, count[node], 0);
    }
    return count;
  };
  const auto balanced = run(10'000);
  EXPECT_LE(std::abs(balanced.at("edge-a") - balanced.at("edge-b")), 1);
  const auto piled = run(0);
  EXPECT_EQ(piled.size(), 1u);
}

}  // namespace
}  // namespace idn
