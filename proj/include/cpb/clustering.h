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

// Grouping organizations from their O2O similarities: k-means and k-NN with
// percentile outlier thresholds, and average-linkage agglomerative clustering.
// All three are deterministic; ties always go to the lowest org index.

#ifndef CPB_CLUSTERING_H_
#define CPB_CLUSTERING_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "cpb/similarity.h"
#include "cpb/types.h"

namespace cpb {

enum class ClusteringAlgorithm { kKMeans, kKnn, kAgglomerative };

std::string_view ClusteringName(ClusteringAlgorithm a);
absl::StatusOr<ClusteringAlgorithm> ParseClustering(std::string_view name);

inline constexpr double kDefaultThresholdPct = 40.0;

struct ClusteringSpec {
  ClusteringAlgorithm algorithm = ClusteringAlgorithm::kKMeans;
  int k = 5;
  // k-means / k-NN only. 100 disables the outlier cut.
  double threshold_pct = kDefaultThresholdPct;
  uint64_t seed = 0;  // k-means seeding
};

struct ClusterAssignment {
  enum class Mode { kPartition, kNeighborhood };

  Mode mode = Mode::kPartition;
  // Partition mode: cluster id of every org before the outlier cut. Cluster
  // ids are numbered in order of their lowest member.
  std::vector<int> label;
  // Partition mode: members that survived the cut, per cluster id, sorted.
  std::vector<std::vector<OrgIndex>> clusters;
  // Neighborhood mode: each org's k nearest orgs, before and after the cut.
  std::vector<std::vector<OrgIndex>> raw_neighbors;
  std::vector<std::vector<OrgIndex>> neighbors;
  // Partition mode: cut by the threshold. Neighborhood mode: every link cut.
  std::vector<bool> outlier;

  size_t size() const { return outlier.size(); }
  // Orgs whose data `org` may receive.
  std::vector<OrgIndex> Peers(OrgIndex org) const;
  // Average cluster (partition) or neighborhood-plus-self size, over
  // non-outliers.
  double AverageSize() const;
  // Non-outlier orgs.
  size_t Collaborators() const;

  friend bool operator==(const ClusterAssignment&,
                         const ClusterAssignment&) = default;
};

// Euclidean k-means over O2O rows with farthest-point seeding from `seed`.
// Orgs farther from their centroid than the `threshold_pct` percentile of all
// distances become outliers.
absl::StatusOr<ClusterAssignment> ClusterKMeans(const SimilarityMatrix& m,
                                                int k, double threshold_pct,
                                                uint64_t seed);

// Each org's k most similar other orgs. Links whose distance (negated
// similarity) exceeds the `threshold_pct` percentile over all links are cut.
absl::StatusOr<ClusterAssignment> ClusterKnn(const SimilarityMatrix& m, int k,
                                             double threshold_pct);

// Average linkage on d(i, j) = 1 - O2O[i,j] / min(O2O[i,i], O2O[j,j]),
// merging until `target` clusters remain. No outlier cut.
absl::StatusOr<ClusterAssignment> ClusterAgglomerative(const SimilarityMatrix& m,
                                                       int target);

absl::StatusOr<ClusterAssignment> Cluster(const SimilarityMatrix& m,
                                          const ClusteringSpec& spec);

// Linear-interpolated percentile (p in [0, 100]) of unsorted values.
double Percentile(std::vector<double> values, double p);

}  // namespace cpb

#endif  // CPB_CLUSTERING_H_
