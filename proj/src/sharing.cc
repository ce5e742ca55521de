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

#include <algorithm>
#include <cmath>
#include <iterator>
#include <tuple>

#include "absl/container/flat_hash_map.h"
#include "absl/container/flat_hash_set.h"
#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "cpb/strings.h"

namespace cpb {
namespace {

template <typename Keep>
SharedPool FilteredPool(OrgIndex org, std::span<const OrgIndex> peers,
                        std::span<const OrgDataset> datasets, Keep keep) {
  SharedPool pool;
  pool.org = org;
  for (OrgIndex peer : peers) {
    if (peer == org) continue;
    for (const ElementCount& e : datasets[peer].entries()) {
      if (keep(e.element.prefix)) {
        pool.entries.push_back({e.element.prefix, e.element.day, peer, e.count});
      }
    }
  }
  pool.Normalize();
  return pool;
}

std::vector<std::vector<OrgIndex>> NoPartners(size_t n) {
  return std::vector<std::vector<OrgIndex>>(n);
}

}  // namespace

std::string_view StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kLocal:
      return "local";
    case Strategy::kGlobal:
      return "global";
    case Strategy::kIntersection:
      return "intersection";
    case Strategy::kIp2Ip:
      return "ip2ip";
    case Strategy::kIp2IpIntersection:
      return "ip2ip+intersection";
    case Strategy::kPairGlobal:
      return "pair-global";
    case Strategy::kPairLocal:
      return "pair-local";
  }
  return "?";
}

absl::StatusOr<Strategy> ParseStrategy(std::string_view name) {
  for (Strategy s :
       {Strategy::kLocal, Strategy::kGlobal, Strategy::kIntersection,
        Strategy::kIp2Ip, Strategy::kIp2IpIntersection, Strategy::kPairGlobal,
        Strategy::kPairLocal}) {
    if (StrategyName(s) == name) return s;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown strategy '", Sv(name), "'"));
}

OrgDataset SharedPool::ToDataset(std::string name) const {
  std::vector<ElementCount> elems;
  elems.reserve(entries.size());
  for (const PoolEntry& e : entries) {
    elems.push_back({{e.prefix, e.day}, e.count});
  }
  return OrgDataset::FromElements(std::move(name), std::move(elems));
}

void SharedPool::Normalize() {
  std::sort(entries.begin(), entries.end(),
            [](const PoolEntry& a, const PoolEntry& b) {
              return std::tie(a.source, a.prefix, a.day) <
                     std::tie(b.source, b.prefix, b.day);
            });
  std::vector<PoolEntry> merged;
  merged.reserve(entries.size());
  for (const PoolEntry& e : entries) {
    if (!merged.empty() && merged.back().source == e.source &&
        merged.back().prefix == e.prefix && merged.back().day == e.day) {
      merged.back().count += e.count;
    } else {
      merged.push_back(e);
    }
  }
  entries = std::move(merged);
}

SharedPool IntersectionPool(OrgIndex org, std::span<const OrgIndex> peers,
                            std::span<const OrgDataset> datasets) {
  const std::vector<Prefix24> mine = datasets[org].prefixes();
  return FilteredPool(org, peers, datasets, [&](Prefix24 p) {
    return std::binary_search(mine.begin(), mine.end(), p);
  });
}

SharedPool GlobalPool(OrgIndex org, std::span<const OrgIndex> peers,
                      std::span<const OrgDataset> datasets) {
  return FilteredPool(org, peers, datasets, [](Prefix24) { return true; });
}

SharedPool SelectedPool(OrgIndex org, std::span<const OrgIndex> peers,
                        std::span<const OrgDataset> datasets,
                        std::span<const Prefix24> wanted) {
  return FilteredPool(org, peers, datasets, [&](Prefix24 p) {
    return std::binary_search(wanted.begin(), wanted.end(), p);
  });
}

SharedPool MergePools(const SharedPool& a, const SharedPool& b) {
  SharedPool out;
  out.org = a.org;
  std::set_union(a.entries.begin(), a.entries.end(), b.entries.begin(),
                 b.entries.end(), std::back_inserter(out.entries),
                 [](const PoolEntry& x, const PoolEntry& y) {
                   return std::tie(x.source, x.prefix, x.day) <
                          std::tie(y.source, y.prefix, y.day);
                 });
  return out;
}

std::vector<std::vector<Prefix24>> CorrelateAttackers(
    std::span<const OrgIndex> members, std::span<const OrgDataset> datasets,
    std::span<const Day> train_days, int heavy_hitters, int k_rec) {
  const size_t t = train_days.size();
  auto slot_of = [&](Day day) -> int {
    auto it = std::find(train_days.begin(), train_days.end(), day);
    return it == train_days.end() ? -1 : static_cast<int>(it - train_days.begin());
  };

  absl::flat_hash_map<Prefix24, uint64_t> totals;
  absl::flat_hash_map<Prefix24, std::vector<uint32_t>> incidence;
  std::vector<std::vector<Prefix24>> observed(members.size());
  for (size_t pos = 0; pos < members.size(); ++pos) {
    for (const ElementCount& e : datasets[members[pos]].entries()) {
      int slot = slot_of(e.element.day);
      if (slot < 0) continue;
      totals[e.element.prefix] += e.count;
      incidence[e.element.prefix].push_back(static_cast<uint32_t>(pos * t + slot));
      auto& seen = observed[pos];
      if (seen.empty() || seen.back() != e.element.prefix) {
        seen.push_back(e.element.prefix);
      }
    }
  }

  std::vector<std::pair<Prefix24, uint64_t>> ranked(totals.begin(), totals.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > static_cast<size_t>(std::max(heavy_hitters, 0))) {
    ranked.resize(std::max(heavy_hitters, 0));
  }
  const size_t h = ranked.size();
  absl::flat_hash_map<Prefix24, uint32_t> hh_index;
  for (size_t i = 0; i < h; ++i) hh_index[ranked[i].first] = static_cast<uint32_t>(i);

  // Co-incidence counts through an inverted index over (member, day) cells.
  std::vector<std::vector<uint32_t>> cell_members(members.size() * t);
  std::vector<double> norm(h);
  for (size_t i = 0; i < h; ++i) {
    const auto& cells = incidence[ranked[i].first];
    norm[i] = std::sqrt(static_cast<double>(cells.size()));
    for (uint32_t c : cells) cell_members[c].push_back(static_cast<uint32_t>(i));
  }
  std::vector<uint32_t> co(h * h, 0);
  for (const auto& list : cell_members) {
    for (size_t a = 0; a < list.size(); ++a) {
      for (size_t b = a + 1; b < list.size(); ++b) {
        ++co[list[a] * h + list[b]];
        ++co[list[b] * h + list[a]];
      }
    }
  }

  std::vector<std::vector<Prefix24>> nearest(h);
  std::vector<std::pair<double, uint32_t>> cand;
  for (size_t a = 0; a < h; ++a) {
    cand.clear();
    for (size_t b = 0; b < h; ++b) {
      if (b == a || co[a * h + b] == 0) continue;
      cand.push_back({co[a * h + b] / (norm[a] * norm[b]), static_cast<uint32_t>(b)});
    }
    std::sort(cand.begin(), cand.end(), [&](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first > y.first;
      return ranked[x.second].first < ranked[y.second].first;
    });
    if (cand.size() > static_cast<size_t>(std::max(k_rec, 0))) {
      cand.resize(std::max(k_rec, 0));
    }
    for (const auto& c : cand) nearest[a].push_back(ranked[c.second].first);
  }

  std::vector<std::vector<Prefix24>> out(members.size());
  for (size_t pos = 0; pos < members.size(); ++pos) {
    const auto& seen = observed[pos];
    std::vector<Prefix24> rec;
    for (Prefix24 p : seen) {
      auto it = hh_index.find(p);
      if (it == hh_index.end()) continue;
      const auto& nn = nearest[it->second];
      rec.insert(rec.end(), nn.begin(), nn.end());
    }
    std::sort(rec.begin(), rec.end());
    rec.erase(std::unique(rec.begin(), rec.end()), rec.end());
    std::vector<Prefix24> fresh;
    std::set_difference(rec.begin(), rec.end(), seen.begin(), seen.end(),
                        std::back_inserter(fresh));
    out[pos] = std::move(fresh);
  }
  return out;
}

std::vector<std::vector<OrgIndex>> PairGlobalPartners(const SimilarityMatrix& m,
                                                      double pct) {
  const size_t n = m.size();
  std::vector<std::pair<OrgIndex, OrgIndex>> pairs;
  for (OrgIndex i = 0; i < n; ++i) {
    for (OrgIndex j = i + 1; j < n; ++j) pairs.push_back({i, j});
  }
  std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
    return m.at(a.first, a.second) > m.at(b.first, b.second);
  });
  size_t take = static_cast<size_t>(std::floor(pct / 100.0 * pairs.size()));
  if (pct > 0 && take == 0 && !pairs.empty()) take = 1;
  take = std::min(take, pairs.size());
  auto partners = NoPartners(n);
  for (size_t p = 0; p < take; ++p) {
    partners[pairs[p].first].push_back(pairs[p].second);
    partners[pairs[p].second].push_back(pairs[p].first);
  }
  for (auto& list : partners) std::sort(list.begin(), list.end());
  return partners;
}

std::vector<std::vector<OrgIndex>> PairLocalPartners(const SimilarityMatrix& m,
                                                     int x, bool mutual) {
  const size_t n = m.size();
  auto picks = NoPartners(n);
  for (OrgIndex i = 0; i < n; ++i) {
    for (OrgIndex j = 0; j < n; ++j) {
      if (j != i) picks[i].push_back(j);
    }
    std::stable_sort(picks[i].begin(), picks[i].end(), [&](OrgIndex a, OrgIndex b) {
      return m.at(i, a) > m.at(i, b);
    });
    if (picks[i].size() > static_cast<size_t>(std::max(x, 0))) {
      picks[i].resize(std::max(x, 0));
    }
    std::sort(picks[i].begin(), picks[i].end());
  }
  if (!mutual) return picks;
  auto partners = NoPartners(n);
  for (OrgIndex i = 0; i < n; ++i) {
    for (OrgIndex j : picks[i]) {
      if (std::binary_search(picks[j].begin(), picks[j].end(), i)) {
        partners[i].push_back(j);
      }
    }
  }
  return partners;
}

absl::StatusOr<std::vector<SharedPool>> Share(
    const ShareOptions& options, const ClusterAssignment& assignment,
    const SimilarityMatrix& similarity, std::span<const OrgDataset> datasets,
    std::span<const Day> train_days) {
  const size_t n = datasets.size();
  const bool pairwise = options.strategy == Strategy::kPairGlobal ||
                        options.strategy == Strategy::kPairLocal;
  if (!pairwise && assignment.size() != n) {
    return absl::InvalidArgumentError("assignment and datasets differ in size");
  }
  if (pairwise && similarity.size() != n) {
    return absl::InvalidArgumentError("similarity and datasets differ in size");
  }
  std::vector<SharedPool> pools(n);
  for (OrgIndex i = 0; i < n; ++i) pools[i].org = i;

  auto ip2ip_pools = [&]() {
    std::vector<SharedPool> out(n);
    for (OrgIndex i = 0; i < n; ++i) out[i].org = i;
    if (assignment.mode == ClusterAssignment::Mode::kPartition) {
      for (const auto& members : assignment.clusters) {
        if (members.size() < 2) continue;
        auto rec = CorrelateAttackers(members, datasets, train_days,
                                      options.heavy_hitters, options.k_rec);
        for (size_t pos = 0; pos < members.size(); ++pos) {
          OrgIndex i = members[pos];
          out[i] = SelectedPool(i, assignment.Peers(i), datasets, rec[pos]);
        }
      }
    } else {
      for (OrgIndex i = 0; i < n; ++i) {
        std::vector<OrgIndex> peers = assignment.Peers(i);
        if (peers.empty()) continue;
        std::vector<OrgIndex> members = peers;
        members.insert(std::lower_bound(members.begin(), members.end(), i), i);
        auto rec = CorrelateAttackers(members, datasets, train_days,
                                      options.heavy_hitters, options.k_rec);
        size_t pos = std::find(members.begin(), members.end(), i) - members.begin();
        out[i] = SelectedPool(i, peers, datasets, rec[pos]);
      }
    }
    return out;
  };

  switch (options.strategy) {
    case Strategy::kLocal:
      break;
    case Strategy::kGlobal:
      for (OrgIndex i = 0; i < n; ++i) {
        pools[i] = GlobalPool(i, assignment.Peers(i), datasets);
      }
      break;
    case Strategy::kIntersection:
      for (OrgIndex i = 0; i < n; ++i) {
        pools[i] = IntersectionPool(i, assignment.Peers(i), datasets);
      }
      break;
    case Strategy::kIp2Ip:
      pools = ip2ip_pools();
      break;
    case Strategy::kIp2IpIntersection: {
      auto rec = ip2ip_pools();
      for (OrgIndex i = 0; i < n; ++i) {
        pools[i] = MergePools(IntersectionPool(i, assignment.Peers(i), datasets),
                              rec[i]);
      }
      break;
    }
    case Strategy::kPairGlobal:
    case Strategy::kPairLocal: {
      auto partners = options.strategy == Strategy::kPairGlobal
                          ? PairGlobalPartners(similarity, options.pair_pct)
                          : PairLocalPartners(similarity, options.pair_x,
                                              options.pair_mutual);
      for (OrgIndex i = 0; i < n; ++i) {
        pools[i] = IntersectionPool(i, partners[i], datasets);
      }
      break;
    }
    default:
      return absl::InvalidArgumentError("unknown strategy");
  }
  return pools;
}

}  // namespace cpb
