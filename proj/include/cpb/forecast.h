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

#ifndef CPB_FORECAST_H_
#define CPB_FORECAST_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "cpb/types.h"

namespace cpb {

inline constexpr double kDefaultAlpha = 0.9;
inline constexpr double kDefaultTau = 0.5;

// Exponentially weighted moving average forecast of the next value:
//   sum_{t'=1..t} alpha * (1 - alpha)^(t - t') * r(t')
// `alpha` must lie strictly inside (0, 1) and the signal must be non-empty.
absl::StatusOr<double> EwmaScore(std::span<const double> signal, double alpha);

enum class SignalMode {
  kPresence,  // r(t) = 1 if the prefix was seen that day; local/shared OR-ed
  kCount,     // r(t) = event count; local and shared counts summed
};

struct PredictOptions {
  double alpha = kDefaultAlpha;
  double tau = kDefaultTau;
  SignalMode mode = SignalMode::kPresence;
};

struct ScoredPrefix {
  Prefix24 prefix;
  double score = 0;

  friend bool operator==(const ScoredPrefix&, const ScoredPrefix&) = default;
};

// Blacklist and whitelist partition the candidate universe (every prefix in
// the local or shared train data); both are sorted.
struct PredictionList {
  std::string org;
  std::vector<Prefix24> blacklist;
  std::vector<Prefix24> whitelist;
  std::vector<ScoredPrefix> scores;  // sorted by prefix

  friend bool operator==(const PredictionList&, const PredictionList&) = default;
};

// Scores every candidate prefix over `train_days` (oldest first) and
// thresholds at tau. Elements outside `train_days` are ignored.
absl::StatusOr<PredictionList> Predict(const OrgDataset& local,
                                       const OrgDataset& shared,
                                       std::span<const Day> train_days,
                                       const PredictOptions& options = {});

}  // namespace cpb

#endif  // CPB_FORECAST_H_
