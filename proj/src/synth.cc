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

#include "cpb/synth.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "absl/container/flat_hash_set.h"
#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "cpb/ingest.h"

namespace cpb {
namespace {

// Hands out distinct routable prefixes.
class PrefixAllocator {
 public:
  explicit PrefixAllocator(std::mt19937_64& rng) : rng_(rng) {}

  Prefix24 Next() {
    std::uniform_int_distribution<uint32_t> dist(0, 0xFFFFFF);
    while (true) {
      Prefix24 p = Prefix24::FromValue(dist(rng_));
      if (IsNonRoutable(p.value() << 8)) continue;
      if (used_.insert(p).second) return p;
    }
  }

  std::vector<Prefix24> Take(size_t n) {
    std::vector<Prefix24> out(n);
    for (auto& p : out) p = Next();
    return out;
  }

 private:
  std::mt19937_64& rng_;
  absl::flat_hash_set<Prefix24> used_;
};

absl::Status Validate(const SynthConfig& c) {
  if (c.num_orgs <= 0 || c.num_days <= 0) {
    return absl::InvalidArgumentError("synth needs at least one org and day");
  }
  if (c.unique_per_day < 1 || c.events_per_day < c.unique_per_day) {
    return absl::InvalidArgumentError(
        "events_per_day must be >= unique_per_day >= 1");
  }
  if (c.victim_clusters < 0 || c.groups_per_cluster < 0 ||
      c.group_prefixes < 0 || c.group_active_days < 1) {
    return absl::InvalidArgumentError("bad attack-group settings");
  }
  if (c.hit_probability < 0 || c.hit_probability > 1 || c.noise_rate < 0 ||
      c.noise_rate > 1 || c.daily_reporter_fraction < 0 ||
      c.daily_reporter_fraction > 1 || c.rate_spread < 0 ||
      c.rate_spread >= 1) {
    return absl::InvalidArgumentError("probability setting out of range");
  }
  if (c.persistent_pool_factor < 1) {
    return absl::InvalidArgumentError("persistent_pool_factor must be >= 1");
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<SynthOutput> SynthesizeLogs(const SynthConfig& config,
                                           uint64_t seed) {
  if (absl::Status s = Validate(config); !s.ok()) return s;
  std::mt19937_64 rng(seed);
  PrefixAllocator alloc(rng);
  const int n = config.num_orgs;
  const int days = config.num_days;

  SynthOutput out;
  for (int o = 0; o < n; ++o) {
    out.log.orgs.push_back(absl::StrFormat("org%04d", o));
  }

  // Org attributes.
  std::vector<int> order(n);
  for (int o = 0; o < n; ++o) order[o] = o;
  std::shuffle(order.begin(), order.end(), rng);
  SynthTruth& truth = out.truth;
  truth.victim_cluster.assign(n, -1);
  if (config.victim_clusters > 0) {
    for (int r = 0; r < n; ++r) {
      truth.victim_cluster[order[r]] =
          static_cast<int>(static_cast<int64_t>(r) * config.victim_clusters / n);
    }
  }
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<double> multiplier(n, 1.0);
  for (int r = 0; r < n; ++r) {
    double t = n == 1 ? 0.5 : static_cast<double>(r) / (n - 1);
    multiplier[order[r]] = 1.0 - config.rate_spread + 2 * config.rate_spread * t;
  }
  std::shuffle(order.begin(), order.end(), rng);
  const int daily =
      static_cast<int>(std::lround(config.daily_reporter_fraction * n));
  truth.daily_reporter.assign(n, false);
  std::vector<int> skipped_day(n, -1);
  for (int r = 0; r < n; ++r) {
    if (r < daily) {
      truth.daily_reporter[order[r]] = true;
    } else {
      skipped_day[order[r]] =
          std::uniform_int_distribution<int>(0, days - 1)(rng);
    }
  }

  // Attack groups.
  const int span = std::min(config.group_active_days, days);
  for (int c = 0; c < config.victim_clusters; ++c) {
    for (int g = 0; g < config.groups_per_cluster; ++g) {
      AttackGroup group;
      group.victim_cluster = c;
      int start = std::uniform_int_distribution<int>(0, days - span)(rng);
      group.first_day = config.first_day + start;
      group.last_day = group.first_day + span - 1;
      group.prefixes = alloc.Take(config.group_prefixes);
      truth.groups.push_back(std::move(group));
    }
  }
  std::vector<std::vector<int>> groups_of_cluster(config.victim_clusters);
  for (size_t g = 0; g < truth.groups.size(); ++g) {
    groups_of_cluster[truth.groups[g].victim_cluster].push_back(
        static_cast<int>(g));
  }

  const std::vector<Prefix24> noise_pool =
      config.noise_rate > 0 ? alloc.Take(config.noise_pool)
                            : std::vector<Prefix24>{};
  std::vector<std::vector<Prefix24>> persistent(n);
  for (int o = 0; o < n; ++o) {
    persistent[o] = alloc.Take(static_cast<size_t>(std::ceil(
        config.persistent_pool_factor * config.unique_per_day * multiplier[o])));
  }

  std::bernoulli_distribution hit(config.hit_probability);
  std::lognormal_distribution<double> weight(0.0, 1.0);
  std::vector<Prefix24> today;
  absl::flat_hash_set<Prefix24> seen;
  for (int o = 0; o < n; ++o) {
    const int unique_target = std::max(
        1, static_cast<int>(std::lround(config.unique_per_day * multiplier[o])));
    const int event_target = std::max(
        unique_target,
        static_cast<int>(std::lround(config.events_per_day * multiplier[o])));
    for (int d = 0; d < days; ++d) {
      const Day day = config.first_day + d;
      if (d == skipped_day[o]) continue;
      today.clear();
      seen.clear();
      auto add = [&](Prefix24 p) {
        if (seen.insert(p).second) today.push_back(p);
      };
      if (truth.victim_cluster[o] >= 0) {
        for (int g : groups_of_cluster[truth.victim_cluster[o]]) {
          const AttackGroup& group = truth.groups[g];
          if (day < group.first_day || day > group.last_day) continue;
          for (size_t k = 0; k < group.prefixes.size(); ++k) {
            if (k == 0 || hit(rng)) add(group.prefixes[k]);
          }
        }
      }
      if (!noise_pool.empty()) {
        const int noise = static_cast<int>(
            std::lround(config.noise_rate * unique_target));
        std::uniform_int_distribution<size_t> pick(0, noise_pool.size() - 1);
        for (int k = 0; k < noise && static_cast<int>(today.size()) < unique_target;
             ++k) {
          add(noise_pool[pick(rng)]);
        }
      }
      // Fill the rest from the org's recurring attackers.
      const auto& pool = persistent[o];
      int needed = unique_target - static_cast<int>(today.size());
      if (needed > 0) {
        std::vector<size_t> idx(pool.size());
        for (size_t k = 0; k < idx.size(); ++k) idx[k] = k;
        for (int k = 0; k < needed && k < static_cast<int>(idx.size()); ++k) {
          size_t j = std::uniform_int_distribution<size_t>(k, idx.size() - 1)(rng);
          std::swap(idx[k], idx[j]);
          add(pool[idx[k]]);
        }
      }

      // One event per unique prefix, the remainder spread by weight.
      std::vector<double> w(today.size());
      for (double& x : w) x = weight(rng);
      std::discrete_distribution<size_t> spread(w.begin(), w.end());
      for (Prefix24 p : today) {
        out.log.events.push_back({static_cast<OrgIndex>(o), p, day});
      }
      const int extra = event_target - static_cast<int>(today.size());
      for (int k = 0; k < extra; ++k) {
        out.log.events.push_back(
            {static_cast<OrgIndex>(o), today[spread(rng)], day});
      }
    }
  }
  return out;
}

}  // namespace cpb
