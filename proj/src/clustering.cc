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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "cpb/strings.h"

namespace cpb {
namespace {

constexpr int kMaxKMeansIterations = 300;

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Renumbers partition labels by lowest member and fills `clusters`.
void Canonicalize(ClusterAssignment& a) {
  std::vector<int> remap;
  int next = 0;
  for (int& l : a.label) {
    if (l >= static_cast<int>(remap.size())) remap.resize(l + 1, -1);
    if (remap[l] < 0) remap[l] = next++;
    l = remap[l];
  }
  a.clusters.assign(next, {});
  for (size_t i = 0; i < a.label.size(); ++i) {
    if (!a.outlier[i]) a.clusters[a.label[i]].push_back(static_cast<OrgIndex>(i));
  }
}

}  // namespace

std::string_view ClusteringName(ClusteringAlgorithm a) {
  switch (a) {
    case ClusteringAlgorithm::kKMeans:
      return "kmeans";
    case ClusteringAlgorithm::kKnn:
      return "knn";
    case ClusteringAlgorithm::kAgglomerative:
      return "agglomerative";
  }
  return "?";
}

absl::StatusOr<ClusteringAlgorithm> ParseClustering(std::string_view name) {
  if (name == "kmeans" || name == "k-means") return ClusteringAlgorithm::kKMeans;
  if (name == "knn" || name == "k-nn") return ClusteringAlgorithm::kKnn;
  if (name == "agglomerative" || name == "agglom") {
    return ClusteringAlgorithm::kAgglomerative;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown clustering '", Sv(name), "'"));
}

double Percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  p = std::clamp(p, 0.0, 100.0);
  double pos = p / 100.0 * (values.size() - 1);
  size_t lo = static_cast<size_t>(std::floor(pos));
  size_t hi = std::min(lo + 1, values.size() - 1);
  double frac = pos - lo;
  return values[lo] + (values[hi] - values[lo]) * frac;
}

std::vector<OrgIndex> ClusterAssignment::Peers(OrgIndex org) const {
  std::vector<OrgIndex> out;
  if (org >= outlier.size() || outlier[org]) return out;
  if (mode == Mode::kNeighborhood) return neighbors[org];
  for (OrgIndex m : clusters[label[org]]) {
    if (m != org) out.push_back(m);
  }
  return out;
}

double ClusterAssignment::AverageSize() const {
  double total = 0;
  size_t count = 0;
  if (mode == Mode::kNeighborhood) {
    for (size_t i = 0; i < size(); ++i) {
      if (outlier[i]) continue;
      total += neighbors[i].size() + 1;
      ++count;
    }
  } else {
    for (const auto& c : clusters) {
      if (c.empty()) continue;
      total += c.size();
      ++count;
    }
  }
  return count == 0 ? 0 : total / count;
}

size_t ClusterAssignment::Collaborators() const {
  return static_cast<size_t>(std::count(outlier.begin(), outlier.end(), false));
}

absl::StatusOr<ClusterAssignment> ClusterKMeans(const SimilarityMatrix& m,
                                                int k, double threshold_pct,
                                                uint64_t seed) {
  const size_t n = m.size();
  if (k < 1 || static_cast<size_t>(k) > n) {
    return absl::InvalidArgumentError(
        absl::StrCat("k-means needs 1 <= k <= n (k=", k, ", n=", n, ")"));
  }
  std::vector<std::vector<double>> x(n, std::vector<double>(n));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) x[i][j] = static_cast<double>(m.at(i, j));
  }

  // Farthest-point seeding.
  std::mt19937_64 rng(seed);
  std::vector<size_t> seeds = {static_cast<size_t>(rng() % n)};
  std::vector<bool> chosen(n, false);
  chosen[seeds[0]] = true;
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (seeds.size() < static_cast<size_t>(k)) {
    for (size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], SquaredDistance(x[i], x[seeds.back()]));
    }
    size_t best = n;
    for (size_t i = 0; i < n; ++i) {
      if (chosen[i]) continue;
      if (best == n || nearest[i] > nearest[best]) best = i;
    }
    chosen[best] = true;
    seeds.push_back(best);
  }
  std::vector<std::vector<double>> centroids;
  for (size_t s : seeds) centroids.push_back(x[s]);

  std::vector<int> label(n, -1);
  for (int iter = 0; iter < kMaxKMeansIterations; ++iter) {
    bool changed = false;
    for (size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = SquaredDistance(x[i], centroids[0]);
      for (int c = 1; c < k; ++c) {
        double d = SquaredDistance(x[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (label[i] != best) {
        label[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    for (int c = 0; c < k; ++c) {
      std::vector<double> sum(n, 0.0);
      size_t members = 0;
      for (size_t i = 0; i < n; ++i) {
        if (label[i] != c) continue;
        ++members;
        for (size_t j = 0; j < n; ++j) sum[j] += x[i][j];
      }
      if (members == 0) continue;  // empty cluster keeps its centroid
      for (double& v : sum) v /= members;
      centroids[c] = std::move(sum);
    }
  }

  std::vector<double> dist(n);
  for (size_t i = 0; i < n; ++i) {
    dist[i] = std::sqrt(SquaredDistance(x[i], centroids[label[i]]));
  }
  const double cut = Percentile(dist, threshold_pct);

  ClusterAssignment a;
  a.mode = ClusterAssignment::Mode::kPartition;
  a.label = std::move(label);
  a.outlier.resize(n);
  for (size_t i = 0; i < n; ++i) a.outlier[i] = dist[i] > cut;
  Canonicalize(a);
  return a;
}

absl::StatusOr<ClusterAssignment> ClusterKnn(const SimilarityMatrix& m, int k,
                                             double threshold_pct) {
  const size_t n = m.size();
  if (k < 1 || static_cast<size_t>(k) >= n) {
    return absl::InvalidArgumentError(
        absl::StrCat("k-NN needs 1 <= k < n (k=", k, ", n=", n, ")"));
  }
  ClusterAssignment a;
  a.mode = ClusterAssignment::Mode::kNeighborhood;
  a.label.assign(n, -1);
  a.raw_neighbors.resize(n);
  std::vector<double> link_distances;
  for (size_t i = 0; i < n; ++i) {
    std::vector<OrgIndex> others;
    for (size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(static_cast<OrgIndex>(j));
    }
    std::stable_sort(others.begin(), others.end(), [&](OrgIndex p, OrgIndex q) {
      return m.at(i, p) > m.at(i, q);
    });
    others.resize(k);
    for (OrgIndex j : others) {
      link_distances.push_back(-static_cast<double>(m.at(i, j)));
    }
    a.raw_neighbors[i] = std::move(others);
  }
  const double cut = Percentile(link_distances, threshold_pct);
  a.neighbors.resize(n);
  a.outlier.resize(n);
  for (size_t i = 0; i < n; ++i) {
    for (OrgIndex j : a.raw_neighbors[i]) {
      if (-static_cast<double>(m.at(i, j)) <= cut) a.neighbors[i].push_back(j);
    }
    std::sort(a.neighbors[i].begin(), a.neighbors[i].end());
    a.outlier[i] = a.neighbors[i].empty();
  }
  return a;
}

absl::StatusOr<ClusterAssignment> ClusterAgglomerative(const SimilarityMatrix& m,
                                                       int target) {
  const size_t n = m.size();
  if (target < 1 || static_cast<size_t>(target) > n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "agglomerative needs 1 <= clusters <= n (", target, ", n=", n, ")"));
  }
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      uint64_t denom = std::min(m.at(i, i), m.at(j, j));
      d[i][j] = denom == 0 ? 1.0
                           : std::max(0.0, 1.0 - static_cast<double>(m.at(i, j)) /
                                               static_cast<double>(denom));
    }
  }
  // Active clusters, kept ordered by lowest member; cluster c is represented
  // by row c of `d` where c is its lowest member.
  std::vector<size_t> active(n);
  std::iota(active.begin(), active.end(), 0);
  std::vector<size_t> size(n, 1);
  std::vector<int> owner(n);
  std::iota(owner.begin(), owner.end(), 0);

  while (active.size() > static_cast<size_t>(target)) {
    size_t ba = 0, bb = 1;
    double best = std::numeric_limits<double>::infinity();
    for (size_t x = 0; x < active.size(); ++x) {
      for (size_t y = x + 1; y < active.size(); ++y) {
        double v = d[active[x]][active[y]];
        if (v < best) {
          best = v;
          ba = x;
          bb = y;
        }
      }
    }
    const size_t a = active[ba], b = active[bb];
    for (size_t c : active) {
      if (c == a || c == b) continue;
      double merged = (size[a] * d[a][c] + size[b] * d[b][c]) / (size[a] + size[b]);
      d[a][c] = d[c][a] = merged;
    }
    size[a] += size[b];
    for (int& o : owner) {
      if (o == static_cast<int>(b)) o = static_cast<int>(a);
    }
    active.erase(active.begin() + bb);
  }

  ClusterAssignment out;
  out.mode = ClusterAssignment::Mode::kPartition;
  out.label = owner;
  out.outlier.assign(n, false);
  Canonicalize(out);
  return out;
}

absl::StatusOr<ClusterAssignment> Cluster(const SimilarityMatrix& m,
                                          const ClusteringSpec& spec) {
  switch (spec.algorithm) {
    case ClusteringAlgorithm::kKMeans:
      return ClusterKMeans(m, spec.k, spec.threshold_pct, spec.seed);
    case ClusteringAlgorithm::kKnn:
      return ClusterKnn(m, spec.k, spec.threshold_pct);
    case ClusteringAlgorithm::kAgglomerative:
      return ClusterAgglomerative(m, spec.k);
  }
  return absl::InvalidArgumentError("unknown clustering algorithm");
}

}  // namespace cpb
