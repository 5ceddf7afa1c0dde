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

#include <cmath>
#include <random>

#include "fixtures.h"
#include "idn/caching.h"

namespace idn {
namespace {

using testing::make_link;
using testing::make_profile;

const ScopeKey kAlice{"t1", "s1", 2};
const ScopeKey kAliceOtherSession{"t1", "s2", 2};
const ScopeKey kBob{"t2", "s9", 2};

StateDescriptor state(const std::string& id, SharingScope scope, Bytes size,
                      std::optional<Bytes> migration = std::nullopt) {
  StateDescriptor s;
  s.state_id = id;
  s.state_type = StateType::kPrefix;
  s.compatibility_hash = "h-" + id;
  s.sharing_scope = scope;
  s.privacy_label = scope == SharingScope::kPublic ? DataClass::kPublic : DataClass::kTenant;
  s.size = size;
  s.migration_cost = migration;
  return s;
}

BenefitInputs worth(double p_hit, double delta) { return {p_hit, delta, 0, 0, 0}; }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const IdnError& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an IdnError";
  return ErrorCode::kInvariantViolation;
}

TEST(CompatibilityHash, DependsOnEveryInput) {
  const auto h = compatibility_hash("r", "bpe", "greedy", "abc");
  EXPECT_EQ(h, compatibility_hash("r", "bpe", "greedy", "abc"));
  EXPECT_NE(h, compatibility_hash("r", "bpe", "sample", "abc"));
  EXPECT_NE(h, compatibility_hash("r2", "bpe", "greedy", "abc"));
  EXPECT_NE(h, compatibility_hash("r", "spm", "greedy", "abc"));
  EXPECT_NE(h, compatibility_hash("r", "bpe", "greedy", "abd"));
  // Field boundaries matter.
  EXPECT_NE(compatibility_hash("ab", "c", "d", "e"), compatibility_hash("a", "bc", "d", "e"));
}

TEST(Benefit, ExpectedSavingMinusCosts) {
  EXPECT_DOUBLE_EQ(benefit({0.5, 100'000, 10'000, 5'000, 0}), 35'000);
  EXPECT_LE(benefit({0.0, 100'000, 10'000, 5'000, 0}), 0.0);
  EXPECT_DOUBLE_EQ(benefit({0.0, 100'000, 10'000, 5'000, 0}), -15'000);
  EXPECT_EQ(benefit({1.0, 1e12, 0, 0, kForbidden}), -std::numeric_limits<double>::infinity());
}

TEST(Admit, PositiveBenefitWithRoomIsAdmitted) {
  CacheManager c;
  c.add_node("n", 1000);
  const auto r = c.admit("n", 3, state("a", SharingScope::kTenantShared, 100), "r", kAlice, 50,
                         {0.5, 100'000, 10'000, 5'000, 0}, 0);
  EXPECT_TRUE(r.admitted);
  EXPECT_DOUBLE_EQ(r.benefit, 35'000);
  EXPECT_EQ(c.store("n").used(), 100);
}

TEST(Admit, NegativeBenefitIsRejected) {
  CacheManager c;
  c.add_node("n", 1000);
  const auto r = c.admit("n", 3, state("a", SharingScope::kTenantShared, 100), "r", kAlice, 50,
                         {0.0, 0, 5'000, 0, 0}, 0);
  EXPECT_FALSE(r.admitted);
  EXPECT_EQ(r.reason, "NegativeBenefit");
  EXPECT_DOUBLE_EQ(r.benefit, -5'000);
}

TEST(Admit, PrivateStateOnUntrustedNodeIsAScopeViolation) {
  CacheManager c;
  c.add_node("n", 1000);
  auto s = state("a", SharingScope::kSessionPrivate, 100);
  s.privacy_label = DataClass::kPrivate;
  const auto r = c.admit("n", 0, s, "r", kAlice, 50, worth(0.5, 1e6), 0);
  EXPECT_FALSE(r.admitted);
  EXPECT_EQ(r.reason, "ScopeViolation");
}

TEST(Admit, DuplicatesAndOversizeAreRejected) {
  CacheManager c;
  c.add_node("n", 1000);
  ASSERT_TRUE(c.admit("n", 3, state("a", SharingScope::kPublic, 100), "r", kAlice, 1,
                      worth(0.5, 1e6), 0).admitted);
  EXPECT_EQ(c.admit("n", 3, state("a", SharingScope::kPublic, 100), "r", kAlice, 1,
                    worth(0.5, 1e6), 0).reason,
            "AlreadyResident");
  EXPECT_EQ(c.admit("n", 3, state("big", SharingScope::kPublic, 2000), "r", kAlice, 1,
                    worth(0.5, 1e6), 0).reason,
            "InsufficientSpace");
}

TEST(Lookup, ScopesDecideWhoSeesAnEntry) {
  CacheManager c;
  c.add_node("n", 1000);
  c.admit("n", 3, state("priv", SharingScope::kSessionPrivate, 10), "r", kAlice, 1,
          worth(0.5, 1e6), 0);
  c.admit("n", 3, state("pub", SharingScope::kPublic, 10), "r", kAlice, 1, worth(0.5, 1e6), 0);
  c.admit("n", 3, state("ten", SharingScope::kTenantShared, 10), "r", kAlice, 1,
          worth(0.5, 1e6), 0);

  EXPECT_TRUE(c.lookup("n", "h-priv", kAlice, 1).has_value());
  EXPECT_FALSE(c.lookup("n", "h-priv", kAliceOtherSession, 1).has_value());
  EXPECT_TRUE(c.lookup("n", "h-pub", kBob, 1).has_value());
  EXPECT_TRUE(c.lookup("n", "h-ten", kAliceOtherSession, 1).has_value());
  EXPECT_FALSE(c.lookup("n", "h-ten", kBob, 1).has_value());
  EXPECT_FALSE(c.lookup("n", "h-none", kAlice, 1).has_value());
}

TEST(ReuseEstimate, LaplaceSmoothedHitRatio) {
  CacheManager c;
  c.add_node("n", 1'000'000);
  c.admit("n", 3, state("a", SharingScope::kPublic, 10), "r", kAlice, 1, worth(0.5, 1e6), 0);
  const auto& entry = [&]() -> const CacheEntry& { return c.store("n").entries().at("a"); };
  EXPECT_DOUBLE_EQ(c.estimate_p_hit(entry(), 0), 0.5);

  // 9 hits out of 18 lookups.
  for (int i = 1; i <= 18; ++i) c.lookup("n", i <= 9 ? "h-a" : "h-x", kAlice, i);
  EXPECT_EQ(c.reuse_stats(entry(), 18), (ReuseStats{18, 9}));
  EXPECT_DOUBLE_EQ(c.estimate_p_hit(entry(), 18), 10.0 / 20.0);

  CacheManager d;
  d.add_node("n", 1'000'000);
  d.admit("n", 3, state("a", SharingScope::kPublic, 10), "r", kAlice, 1, worth(0.5, 1e6), 0);
  for (int i = 1; i <= 98; ++i) d.lookup("n", "h-x", kAlice, i);
  EXPECT_DOUBLE_EQ(d.estimate_p_hit(d.store("n").entries().at("a"), 98), 1.0 / 100.0);
}

TEST(ReuseEstimate, OldLookupsLeaveTheWindow) {
  CacheConfig config;
  config.reuse_window = 100;
  CacheManager c(config);
  c.add_node("n", 1000);
  c.admit("n", 3, state("a", SharingScope::kPublic, 10), "r", kAlice, 1, worth(0.5, 1e6), 0);
  for (int i = 1; i <= 10; ++i) c.lookup("n", "h-x", kAlice, i);
  EXPECT_DOUBLE_EQ(c.estimate_p_hit(c.store("n").entries().at("a"), 10), 1.0 / 12.0);
  EXPECT_DOUBLE_EQ(c.estimate_p_hit(c.store("n").entries().at("a"), 1000), 0.5);
}

TEST(Evict, AmpleSpaceEvictsNothing) {
  CacheManager c;
  c.add_node("n", 1000);
  c.admit("n", 3, state("a", SharingScope::kPublic, 100), "r", kAlice, 1, worth(0.5, 1e6), 0);
  EXPECT_TRUE(c.evict_for("n", 500, 0).empty());
}

TEST(Evict, LowestDensityGoesFirst) {
  CacheManager c;
  c.add_node("n", 200);
  // Densities 0.5 * delta / 100: 0.1 and 0.9 per byte.
  c.admit("n", 3, state("low", SharingScope::kPublic, 100), "r", kAlice, 1, worth(0.5, 20), 0);
  c.admit("n", 3, state("high", SharingScope::kPublic, 100), "r", kAlice, 1, worth(0.5, 180), 0);
  EXPECT_DOUBLE_EQ(c.benefit_density(c.store("n").entries().at("low"), 0), 0.1);
  EXPECT_DOUBLE_EQ(c.benefit_density(c.store("n").entries().at("high"), 0), 0.9);
  EXPECT_EQ(c.evict_for("n", 100, 0), (std::vector<std::string>{"low"}));
  EXPECT_TRUE(c.store("n").entries().count("high"));
}

TEST(Evict, NewcomerOnlyDisplacesLowerDensity) {
  CacheManager c;
  c.add_node("n", 100);
  c.admit("n", 3, state("old", SharingScope::kPublic, 100), "r", kAlice, 1, worth(0.5, 200), 0);
  // Density 0.5 * 100 / 100 = 0.5 < 1.0: refused.
  EXPECT_EQ(c.admit("n", 3, state("weak", SharingScope::kPublic, 100), "r", kAlice, 1,
                    worth(0.5, 100), 0).reason,
            "InsufficientSpace");
  const auto r = c.admit("n", 3, state("strong", SharingScope::kPublic, 100), "r", kAlice, 1,
                         worth(0.5, 1000), 0);
  EXPECT_TRUE(r.admitted);
  EXPECT_EQ(r.evicted, (std::vector<std::string>{"old"}));
}

TEST(Evict, SessionEndDropsOnlyThatSessionsPrivateState) {
  CacheManager c;
  c.add_node("a", 1000);
  c.add_node("b", 1000);
  c.admit("a", 3, state("p1", SharingScope::kSessionPrivate, 10), "r", kAlice, 1,
          worth(0.5, 1e6), 0);
  c.admit("b", 3, state("p2", SharingScope::kSessionPrivate, 10), "r", kAlice, 1,
          worth(0.5, 1e6), 0);
  c.admit("a", 3, state("t1", SharingScope::kTenantShared, 10), "r", kAlice, 1,
          worth(0.5, 1e6), 0);
  c.admit("a", 3, state("other", SharingScope::kSessionPrivate, 10), "r", kAliceOtherSession, 1,
          worth(0.5, 1e6), 0);
  auto dropped = c.session_end("s1", 5);
  std::sort(dropped.begin(), dropped.end());
  EXPECT_EQ(dropped, (std::vector<std::string>{"p1", "p2"}));
  EXPECT_EQ(c.store("a").entries().size(), 2u);
}

struct Pair {
  Pair() {
    auto pa = make_profile("a", "d", "g", Tier::kEdge, "l4", 1.0, 1, 1 << 30, 3);
    auto pb = make_profile("b", "d", "g", Tier::kEdge, "l4", 1.0, 1, 1 << 30, 3);
    topology = std::make_unique<Topology>(
        std::vector<RegionId>{"g"},
        std::vector<Node>{{"a", pa, true}, {"b", pb, true}},
        std::vector<Domain>{{"d", {}, 0, ""}},
        std::vector<Link>{make_link("ab", "a", "b", 10'000, 100)});
    cache.add_node("a", 1 << 22);
    cache.add_node("b", 1 << 22);
  }
  std::unique_ptr<Topology> topology;
  CacheManager cache;
};

TEST(Migrate, OneMebibyteOverASlowLink) {
  Pair p;
  ASSERT_TRUE(p.cache.admit("a", 3, state("kv", SharingScope::kTenantShared, 1 << 20, 1 << 20),
                            "r", kAlice, 10, worth(0.5, 1e7), 0).admitted);
  const auto t = p.cache.migrate("kv", "a", "b", 3, *p.topology, 1000);
  // ceil(1048576 / 100) = 10486.
  EXPECT_EQ(t.available_at, 1000 + 10'000 + 10'486);
  EXPECT_TRUE(p.cache.locate("h-kv", kAlice).size() == 1);  // not visible yet at b
  const auto r = p.cache.complete_migration(t, 3, worth(0.5, 1e7), t.available_at);
  EXPECT_TRUE(r.admitted);
  EXPECT_EQ(p.cache.locate("h-kv", kAlice).size(), 2u);
}

TEST(Migrate, HardwareBoundAndNonMigratableStateStays) {
  Pair p;
  auto hw = state("hw", SharingScope::kHardwareBound, 100);
  hw.state_type = StateType::kTensorState;
  p.cache.admit("a", 3, hw, "r", kAlice, 1, worth(0.5, 1e6), 0);
  EXPECT_EQ(code_of([&] { p.cache.migrate("hw", "a", "b", 3, *p.topology, 0); }),
            ErrorCode::kHardwareBound);
  p.cache.admit("a", 3, state("fixed", SharingScope::kTenantShared, 100), "r", kAlice, 1,
                worth(0.5, 1e6), 0);
  EXPECT_EQ(code_of([&] { p.cache.migrate("fixed", "a", "b", 3, *p.topology, 0); }),
            ErrorCode::kHardwareBound);
}

TEST(Migrate, UntrustedDestinationIsAScopeViolation) {
  Pair p;
  p.cache.admit("a", 3, state("kv", SharingScope::kSessionPrivate, 100, 100), "r", kAlice, 1,
                worth(0.5, 1e6), 0);
  EXPECT_EQ(code_of([&] { p.cache.migrate("kv", "a", "b", 1, *p.topology, 0); }),
            ErrorCode::kScopeViolation);
}

TEST(Invalidate, DropsEntriesOfTheRealization) {
  CacheManager c;
  c.add_node("n", 1000);
  c.admit("n", 3, state("a", SharingScope::kPublic, 10), "r1", kAlice, 1, worth(0.5, 1e6), 0);
  c.admit("n", 3, state("b", SharingScope::kPublic, 10), "r2", kAlice, 1, worth(0.5, 1e6), 0);
  EXPECT_EQ(c.invalidate_realization("r1", 1), (std::vector<std::string>{"a"}));
  EXPECT_EQ(c.store("n").used(), 10);
}

TEST(StoreProperty, RandomTrafficNeverOverfillsOrLeaksScope) {
  std::mt19937_64 rng(41);
  CacheManager c;
  c.add_node("a", 5000);
  c.add_node("b", 3000);
  const std::vector<ScopeKey> keys = {kAlice, kAliceOtherSession, kBob};
  const std::vector<SharingScope> scopes = {SharingScope::kPublic, SharingScope::kTenantShared,
                                            SharingScope::kSessionPrivate};
  for (int step = 0; step < 3000; ++step) {
    const NodeId node = rng() % 2 ? "a" : "b";
    const Micros now = step * 1000;
    const auto& key = keys[rng() % keys.size()];
    const std::string id = "s" + std::to_string(rng() % 40);
    switch (rng() % 4) {
      case 0:
      case 1: {
        auto s = state(id, scopes[rng() % scopes.size()], 1 + static_cast<Bytes>(rng() % 1500));
        const double p = static_cast<double>(rng() % 100) / 100.0;
        c.admit(node, static_cast<int>(rng() % 4), s, "r", key, 1,
                {p, static_cast<double>(rng() % 10'000), static_cast<double>(rng() % 2000), 0, 0},
                now);
        break;
      }
      case 2:
        c.lookup(node, "h-" + id, key, now);
        break;
      default:
        c.session_end(key.session_id, now);
    }
  }
  std::int64_t admits = 0;
  for (const auto& e : c.events()) {
    EXPECT_LE(e.used_after, e.capacity);
    if (e.kind == CacheEventKind::kAdmit) {
      ++admits;
      EXPECT_GT(e.benefit, 0.0);
    }
    if (e.kind == CacheEventKind::kHit) EXPECT_TRUE(scope_authorizes(e.scope, e.owner, e.requester));
  }
  EXPECT_GT(admits, 0);
  for (const NodeId n : {"a", "b"}) {
    Bytes sum = 0;
    for (const auto& [id, e] : c.store(n).entries()) sum += e.state.size;
    EXPECT_EQ(sum, c.store(n).used());
  }
}

}  // namespace
}  // namespace idn
