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

// Synthetic DShield-like alert logs with planted ground truth.
//
// Every organization belongs to one victim cluster. Each cluster is targeted
// by a few attacker groups; a group is a set of /24 prefixes active over a
// contiguous span of days, and each of its prefixes hits each cluster member
// with a fixed probability per active day (the group's first prefix hits every
// member on every active day). The rest of an org's daily unique prefixes come
// from a private pool of recurring attackers plus, optionally, a shared
// background-noise pool. Daily event totals are spread over the day's unique
// prefixes with a log-normal weight per prefix.

#ifndef CPB_SYNTH_H_
#define CPB_SYNTH_H_

#include <cstdint>
#include <vector>

#include "absl/status/statusor.h"
#include "cpb/types.h"

namespace cpb {

inline constexpr Day kDefaultFirstDay = 16572;  // 2015-05-17

struct SynthConfig {
  int num_orgs = 100;
  int num_days = 15;
  Day first_day = kDefaultFirstDay;
  double events_per_day = 4000;
  double unique_per_day = 600;
  int victim_clusters = 10;
  int groups_per_cluster = 3;
  int group_prefixes = 120;
  int group_active_days = 6;
  double hit_probability = 0.5;
  // Fraction of an org's daily unique prefixes drawn from the shared pool.
  double noise_rate = 0.2;
  int noise_pool = 50000;
  // Private recurring pool size, as a multiple of the daily unique rate.
  double persistent_pool_factor = 1.5;
  // Orgs outside this fraction skip one random day.
  double daily_reporter_fraction = 1.0;
  // Per-org rate multipliers are spread evenly over [1 - s, 1 + s].
  double rate_spread = 0.5;

  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

struct AttackGroup {
  int victim_cluster = 0;
  Day first_day = 0;
  Day last_day = 0;
  std::vector<Prefix24> prefixes;
};

struct SynthTruth {
  std::vector<int> victim_cluster;  // per org
  std::vector<bool> daily_reporter;
  std::vector<AttackGroup> groups;
};

struct SynthOutput {
  EventLog log;
  SynthTruth truth;
};

// Deterministic for a fixed (config, seed).
absl::StatusOr<SynthOutput> SynthesizeLogs(const SynthConfig& config,
                                           uint64_t seed);

}  // namespace cpb

#endif  // CPB_SYNTH_H_
