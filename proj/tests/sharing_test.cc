// Copyright 2026 The CPB Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cpb/sharing.h"

#include <set>

#include "gtest/gtest.h"
#include "test_util.h"

namespace cpb {
namespace {

Prefix24 P(uint32_t v) { return Prefix24::FromValue(v); }

ClusterAssignment OneCluster(size_t n) {
  ClusterAssignment a;
  a.label.assign(n, 0);
  a.outlier.assign(n, false);
  a.clusters.assign(1, {});
  for (OrgIndex i = 0; i < n; ++i) a.clusters[0].push_back(i);
  return a;
}

TEST(SharingTest, IntersectionAndGlobalOracle) {
  std::mt19937_64 rng(5);
  std::vector<OrgDataset> d;
  for (int i = 0; i < 5; ++i) {
    d.push_back(testing::RandomDataset(rng, "o", 150, 3, 80, 4));
  }
  std::vector<OrgIndex> peers = {0, 1, 2, 3, 4};
  for (OrgIndex r = 0; r < 5; ++r) {
    std::set<Prefix24> mine;
    for (const auto& e : d[r].entries()) mine.insert(e.element.prefix);
    std::vector<PoolEntry> want_inter, want_global;
    for (OrgIndex s = 0; s < 5; ++s) {
      if (s == r) continue;
      for (const auto& e : d[s].entries()) {
        PoolEntry pe{e.element.prefix, e.element.day, s, e.count};
        want_global.push_back(pe);
        if (mine.count(e.element.prefix)) want_inter.push_back(pe);
      }
    }
    auto key = [](const PoolEntry& x) {
      return std::tie(x.source, x.prefix, x.day);
    };
    auto by_key = [&](const PoolEntry& x, const PoolEntry& y) {
      return key(x) < key(y);
    };
    std::sort(want_inter.begin(), want_inter.end(), by_key);
    std::sort(want_global.begin(), want_global.end(), by_key);
    EXPECT_EQ(IntersectionPool(r, peers, d).entries, want_inter);
    EXPECT_EQ(GlobalPool(r, peers, d).entries, want_global);
  }
}

TEST(SharingTest, ToDatasetMergesSources) {
  SharedPool pool;
  pool.entries = {{P(1), 3, 0, 2}, {P(1), 3, 4, 1}, {P(2), 3, 4, 1}};
  pool.Normalize();
  OrgDataset d = pool.ToDataset("x");
  EXPECT_EQ(d.count({P(1), 3}), 3u);
  EXPECT_EQ(d.multiset_size(), 4u);
}

TEST(SharingTest, MergePoolsIsUnion) {
  SharedPool a, b;
  a.entries = {{P(1), 1, 0, 1}, {P(2), 1, 0, 1}};
  b.entries = {{P(2), 1, 0, 1}, {P(3), 1, 1, 1}};
  SharedPool m = MergePools(a, b);
  EXPECT_EQ(m.entries.size(), 3u);
}

TEST(SharingTest, CorrelateRecommendsCoOccurring) {
  // Prefixes 1 and 2 always appear together at orgs 1 and 2; org 0 has only 1.
  std::vector<OrgDataset> d = {
      OrgDataset::FromElements("a", {{{P(1), 0}, 1}, {{P(9), 1}, 1}}),
      OrgDataset::FromElements("b", {{{P(1), 0}, 1}, {{P(2), 0}, 1}}),
      OrgDataset::FromElements("c", {{{P(1), 1}, 1}, {{P(2), 1}, 1}}),
  };
  std::vector<OrgIndex> members = {0, 1, 2};
  std::vector<Day> days = {0, 1};
  auto rec = CorrelateAttackers(members, d, days, 10, 5);
  ASSERT_EQ(rec.size(), 3u);
  EXPECT_EQ(rec[0], (std::vector<Prefix24>{P(2)}));
  EXPECT_TRUE(rec[1].empty());
  EXPECT_TRUE(rec[2].empty());

  // With one heavy hitter, prefix 1 has no neighbors.
  auto narrow = CorrelateAttackers(members, d, days, 1, 5);
  EXPECT_TRUE(narrow[0].empty());

  ShareOptions opt{.strategy = Strategy::kIp2Ip, .heavy_hitters = 10, .k_rec = 5};
  auto pools = Share(opt, OneCluster(3), O2oPlain(d), d, days);
  ASSERT_TRUE(pools.ok());
  std::vector<PoolEntry> want = {{P(2), 0, 1, 1}, {P(2), 1, 2, 1}};
  EXPECT_EQ((*pools)[0].entries, want);
}

TEST(SharingTest, PairPartners) {
  SimilarityMatrix m(4);
  m.set(0, 1, 10); m.set(1, 0, 10);
  m.set(2, 3, 8); m.set(3, 2, 8);
  m.set(0, 2, 1); m.set(2, 0, 1);
  // 6 pairs; 34% is two pairs.
  auto g = PairGlobalPartners(m, 34);
  EXPECT_EQ(g[0], (std::vector<OrgIndex>{1}));
  EXPECT_EQ(g[3], (std::vector<OrgIndex>{2}));
  // At least one pair whenever pct > 0.
  auto tiny = PairGlobalPartners(m, 1);
  EXPECT_EQ(tiny[0], (std::vector<OrgIndex>{1}));
  EXPECT_TRUE(tiny[2].empty());
  EXPECT_TRUE(PairGlobalPartners(m, 0)[0].empty());

  auto local = PairLocalPartners(m, 1, false);
  EXPECT_EQ(local[0], (std::vector<OrgIndex>{1}));
  EXPECT_EQ(local[2], (std::vector<OrgIndex>{3}));
  m.set(1, 0, 0);
  m.set(1, 3, 5);
  auto mutual = PairLocalPartners(m, 1, true);
  EXPECT_TRUE(mutual[0].empty());
  EXPECT_EQ(mutual[3], (std::vector<OrgIndex>{2}));
}

TEST(SharingTest, LocalAndOutliersGetNothing) {
  std::mt19937_64 rng(2);
  std::vector<OrgDataset> d;
  for (int i = 0; i < 3; ++i) d.push_back(testing::RandomDataset(rng, "o", 50, 1, 20, 2));
  std::vector<Day> days = {16572, 16573};
  auto local = Share({.strategy = Strategy::kLocal}, OneCluster(3), O2oPlain(d), d, days);
  ASSERT_TRUE(local.ok());
  for (const auto& p : *local) EXPECT_TRUE(p.entries.empty());
  ClusterAssignment a = OneCluster(3);
  a.outlier[1] = true;
  a.clusters[0] = {0, 2};
  auto inter = Share({.strategy = Strategy::kGlobal}, a, O2oPlain(d), d, days);
  ASSERT_TRUE(inter.ok());
  EXPECT_TRUE((*inter)[1].entries.empty());
  for (const auto& e : (*inter)[0].entries) EXPECT_EQ(e.source, 2u);
  EXPECT_FALSE(Share({}, OneCluster(2), O2oPlain(d), d, days).ok());
}

TEST(SharingTest, StrategyNames) {
  for (const char* name : {"local", "global", "intersection", "ip2ip",
                           "ip2ip+intersection", "pair-global", "pair-local"}) {
    auto s = ParseStrategy(name);
    ASSERT_TRUE(s.ok()) << name;
    EXPECT_EQ(StrategyName(*s), name);
  }
  EXPECT_FALSE(ParseStrategy("everyone").ok());
}

}  // namespace
}  // namespace cpb
