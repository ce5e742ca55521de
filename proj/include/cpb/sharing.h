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

#ifndef CPB_SHARING_H_
#define CPB_SHARING_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "cpb/clustering.h"
#include "cpb/similarity.h"
#include "cpb/types.h"

namespace cpb {

enum class Strategy {
  kLocal,
  kGlobal,
  kIntersection,
  kIp2Ip,
  kIp2IpIntersection,
  kPairGlobal,
  kPairLocal,
};

std::string_view StrategyName(Strategy s);
absl::StatusOr<Strategy> ParseStrategy(std::string_view name);

struct PoolEntry {
  Prefix24 prefix;
  Day day = 0;
  OrgIndex source = 0;
  uint32_t count = 0;

  friend auto operator<=>(const PoolEntry&, const PoolEntry&) = default;
};

// D'_i: alerts `org` receives from collaborators, sorted by
// (source, prefix, day, count) with no duplicate (source, prefix, day).
struct SharedPool {
  OrgIndex org = 0;
  std::vector<PoolEntry> entries;

  // Drops source attribution and merges counts per element.
  OrgDataset ToDataset(std::string name = {}) const;
  // Sorts and merges duplicate (source, prefix, day) entries.
  void Normalize();

  friend bool operator==(const SharedPool&, const SharedPool&) = default;
};

inline constexpr int kDefaultHeavyHitters = 1000;
inline constexpr int kDefaultRecommendations = 50;

struct ShareOptions {
  Strategy strategy = Strategy::kIntersection;
  double pair_pct = 1.0;     // pair-global: percent of all pairs
  int pair_x = 1;            // pair-local: partners per org
  bool pair_mutual = false;  // pair-local: require both sides to pick
  int heavy_hitters = kDefaultHeavyHitters;
  int k_rec = kDefaultRecommendations;
};

// Events of each peer whose prefix `org` has also seen.
SharedPool IntersectionPool(OrgIndex org, std::span<const OrgIndex> peers,
                            std::span<const OrgDataset> datasets);
// Every event of each peer.
SharedPool GlobalPool(OrgIndex org, std::span<const OrgIndex> peers,
                      std::span<const OrgDataset> datasets);
// Events of each peer whose prefix is in `wanted` (sorted).
SharedPool SelectedPool(OrgIndex org, std::span<const OrgIndex> peers,
                        std::span<const OrgDataset> datasets,
                        std::span<const Prefix24> wanted);

// Union of two pools for the same org.
SharedPool MergePools(const SharedPool& a, const SharedPool& b);

// IP2IP recommendation inside one group of orgs. The `heavy_hitters` most
// reported prefixes (ties: lower prefix) get a 0/1 incidence vector over
// (member, train day); prefixes are compared by cosine. Each member is
// recommended the k_rec nearest heavy hitters of every heavy hitter it saw,
// minus what it saw. Result is aligned with `members`, each list sorted.
std::vector<std::vector<Prefix24>> CorrelateAttackers(
    std::span<const OrgIndex> members, std::span<const OrgDataset> datasets,
    std::span<const Day> train_days, int heavy_hitters = kDefaultHeavyHitters,
    int k_rec = kDefaultRecommendations);

// Partner lists for the pairwise baselines. pair-global takes the top
// pct% of all n(n-1)/2 pairs; pair-local lets every org pull from its x most
// similar orgs (or only reciprocated picks when mutual).
std::vector<std::vector<OrgIndex>> PairGlobalPartners(const SimilarityMatrix& m,
                                                      double pct);
std::vector<std::vector<OrgIndex>> PairLocalPartners(const SimilarityMatrix& m,
                                                     int x, bool mutual);

// Builds every org's shared pool for one window.
absl::StatusOr<std::vector<SharedPool>> Share(
    const ShareOptions& options, const ClusterAssignment& assignment,
    const SimilarityMatrix& similarity, std::span<const OrgDataset> datasets,
    std::span<const Day> train_days);

}  // namespace cpb

#endif  // CPB_SHARING_H_
