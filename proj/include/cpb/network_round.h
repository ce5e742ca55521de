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

#ifndef CPB_NETWORK_ROUND_H_
#define CPB_NETWORK_ROUND_H_

#include <chrono>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "cpb/clustering.h"
#include "cpb/crypto.h"
#include "cpb/privacy.h"
#include "cpb/types.h"

namespace cpb {

struct NetworkRoundOptions {
  uint64_t round = 0;
  std::chrono::milliseconds timeout{60000};
  std::string transcript_path;
};

struct NetworkRoundResult {
  RoundOutput output;
  std::vector<std::string> transcript;
  uint64_t sta_bytes_received = 0;
};

// Runs an STA on a loopback port and one client thread per dataset, then
// assembles the same RoundOutput SimulateRound produces.
absl::StatusOr<NetworkRoundResult> RunNetworkedRound(
    std::span<const OrgDataset> datasets, const SharedKey& key,
    const ClusteringSpec& clustering, std::span<const Day> share_days,
    const NetworkRoundOptions& options = {});

}  // namespace cpb

#endif  // CPB_NETWORK_ROUND_H_
