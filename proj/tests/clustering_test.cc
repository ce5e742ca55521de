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

#include "cpb/clustering.h"

#include <set>

#include "gtest/gtest.h"
#include "test_util.h"

namespace cpb {
namespace {

const std::vector<int> kSizes = {6, 5, 7};

// Same partition up to relabeling.
bool SamePartition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = 0; j < a.size(); ++j) {
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    }
  }
  return true;
}

TEST(PercentileTest, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(Percentile({4, 1, 3, 2}, 0), 1);
  EXPECT_DOUBLE_EQ(Percentile({4, 1, 3, 2}, 100), 4);
  EXPECT_DOUBLE_EQ(Percentile({4, 1, 3, 2}, 50), 2.5);
  EXPECT_DOUBLE_EQ(Percentile({1, 2, 3, 4, 5}, 40), 2.6);
  EXPECT_DOUBLE_EQ(Percentile({}, 40), 0);
}

TEST(ClusteringTest, KMeansRecoversPlanted) {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    SimilarityMatrix m = O2oPlain(testing::PlantedGroups(seed, kSizes));
    auto a = ClusterKMeans(m, 3, 100, seed);
    ASSERT_TRUE(a.ok());
    EXPECT_TRUE(SamePartition(a->label, testing::PlantedLabels(kSizes)));
    EXPECT_EQ(a->Collaborators(), 18u);
    EXPECT_NEAR(a->AverageSize(), 6.0, 1e-12);
  }
}

TEST(ClusteringTest, KMeansThresholdDropsFarthest) {
  SimilarityMatrix m = O2oPlain(testing::PlantedGroups(2, kSizes));
  auto a = ClusterKMeans(m, 3, 40, 2);
  ASSERT_TRUE(a.ok());
  size_t kept = a->Collaborators();
  EXPECT_GE(kept, 7u);
  EXPECT_LE(kept, 8u);
  for (size_t i = 0; i < a->size(); ++i) {
    if (a->outlier[i]) EXPECT_TRUE(a->Peers(i).empty());
  }
  // Clusters list only survivors, grouped by label.
  for (size_t c = 0; c < a->clusters.size(); ++c) {
    for (OrgIndex o : a->clusters[c]) {
      EXPECT_FALSE(a->outlier[o]);
      EXPECT_EQ(a->label[o], static_cast<int>(c));
    }
  }
}

TEST(ClusteringTest, CanonicalLabelsAndDeterminism) {
  SimilarityMatrix m = O2oPlain(testing::PlantedGroups(4, kSizes));
  auto a = ClusterKMeans(m, 3, 40, 77);
  auto b = ClusterKMeans(m, 3, 40, 77);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(*a, *b);
  // Labels appear in order of lowest member.
  int next = 0;
  for (int l : a->label) {
    EXPECT_LE(l, next);
    if (l == next) ++next;
  }
}

TEST(ClusteringTest, KnnNeighborsAreGroupmates) {
  SimilarityMatrix m = O2oPlain(testing::PlantedGroups(3, {5, 5, 5}));
  auto a = ClusterKnn(m, 4, 100);
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(a->mode, ClusterAssignment::Mode::kNeighborhood);
  auto labels = testing::PlantedLabels({5, 5, 5});
  for (size_t i = 0; i < 15; ++i) {
    ASSERT_EQ(a->raw_neighbors[i].size(), 4u);
    for (OrgIndex j : a->raw_neighbors[i]) EXPECT_EQ(labels[j], labels[i]);
    EXPECT_EQ(a->Peers(i), a->neighbors[i]);
  }
  EXPECT_NEAR(a->AverageSize(), 5.0, 1e-12);
}

TEST(ClusteringTest, KnnThresholdCutsWeakLinks) {
  SimilarityMatrix m = O2oPlain(testing::PlantedGroups(3, {5, 5, 5}));
  auto a = ClusterKnn(m, 4, 40);
  ASSERT_TRUE(a.ok());
  size_t links = 0;
  for (const auto& n : a->neighbors) links += n.size();
  EXPECT_LT(links, 60u);
  EXPECT_GT(links, 0u);
}

TEST(ClusteringTest, AgglomerativeRecoversPlanted) {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    SimilarityMatrix m = O2oPlain(testing::PlantedGroups(seed, kSizes));
    auto a = ClusterAgglomerative(m, 3);
    ASSERT_TRUE(a.ok());
    EXPECT_TRUE(SamePartition(a->label, testing::PlantedLabels(kSizes)));
    EXPECT_EQ(a->Collaborators(), 18u);
  }
}

TEST(ClusteringTest, AgglomerativeOneClusterHoldsAll) {
  SimilarityMatrix m = O2oPlain(testing::PlantedGroups(1, {3, 3}));
  auto a = ClusterAgglomerative(m, 1);
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(a->clusters.size(), 1u);
  EXPECT_EQ(a->Peers(0).size(), 5u);
}

TEST(ClusteringTest, Errors) {
  SimilarityMatrix m = O2oPlain(testing::PlantedGroups(1, {3}));
  EXPECT_FALSE(ClusterKMeans(m, 0, 40, 1).ok());
  EXPECT_FALSE(ClusterKMeans(m, 4, 40, 1).ok());
  EXPECT_FALSE(ClusterKnn(m, 3, 40).ok());
  EXPECT_FALSE(ClusterAgglomerative(m, 4).ok());
  EXPECT_FALSE(ParseClustering("dbscan").ok());
  EXPECT_EQ(*ParseClustering("k-means"), ClusteringAlgorithm::kKMeans);
  ClusteringSpec spec{.algorithm = ClusteringAlgorithm::kKnn, .k = 2};
  EXPECT_TRUE(Cluster(m, spec).ok());
}

}  // namespace
}  // namespace cpb
