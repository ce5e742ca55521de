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

#ifndef CPB_CONFIG_H_
#define CPB_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "cpb/clustering.h"
#include "cpb/forecast.h"
#include "cpb/sharing.h"
#include "cpb/synth.h"

namespace cpb {

enum class PrivacyMode { kPlaintextOracle, kPrpSim, kNetworked };

std::string_view PrivacyModeName(PrivacyMode m);
absl::StatusOr<PrivacyMode> ParsePrivacyMode(std::string_view name);

enum class DataFormat { kDShield, kEvents };

struct ExperimentConfig {
  // Empty data_path means synthetic data.
  std::string data_path;
  DataFormat data_format = DataFormat::kDShield;
  char separator = '\t';
  SynthConfig synth;

  uint64_t seed = 1;
  // 0 = first day present in the data.
  Day first_day = 0;
  // 0 = every day from first_day to the last day in the data.
  int num_days = 0;
  int train_days = 5;
  int test_days = 1;

  double alpha = kDefaultAlpha;
  double tau = kDefaultTau;
  SignalMode signal = SignalMode::kPresence;

  Strategy strategy = Strategy::kIntersection;
  ClusteringAlgorithm clustering = ClusteringAlgorithm::kKMeans;
  int k = 5;
  double threshold_pct = kDefaultThresholdPct;
  int heavy_hitters = kDefaultHeavyHitters;
  int k_rec = kDefaultRecommendations;
  double pair_pct = 1.0;
  int pair_x = 1;
  bool pair_mutual = false;

  PrivacyMode privacy = PrivacyMode::kPlaintextOracle;
  // Networked mode: per-round timeout in milliseconds.
  int network_timeout_ms = 60000;
  // Adds per-window rows to the summary.
  bool group_by_window = false;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

absl::Status ValidateConfig(const ExperimentConfig& c);

// One "key = value" per line; '#' starts a comment. Unknown keys are errors.
absl::StatusOr<ExperimentConfig> ParseConfig(std::string_view text);
absl::StatusOr<ExperimentConfig> LoadConfig(const std::string& path);
// Writes every key; ParseConfig(SerializeConfig(c)) == c.
std::string SerializeConfig(const ExperimentConfig& c);

// Named sub-seed derived from the master seed.
uint64_t SubSeed(uint64_t master, std::string_view name);

}  // namespace cpb

#endif  // CPB_CONFIG_H_
