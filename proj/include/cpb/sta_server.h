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

#ifndef CPB_STA_SERVER_H_
#define CPB_STA_SERVER_H_

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "cpb/clustering.h"
#include "cpb/similarity.h"
#include "cpb/wire.h"

namespace cpb {

struct StaConfig {
  std::string listen = "127.0.0.1:0";
  // Number of distinct organizations the round waits for.
  size_t expected_orgs = 0;
  // Optional allow-list; empty admits any name up to expected_orgs.
  std::vector<std::string> org_names;
  ClusteringSpec clustering;
  uint64_t round = 0;
  // Upload collection deadline, and again the delivery deadline.
  std::chrono::milliseconds timeout{30000};
  // Appends the transcript here when set.
  std::string transcript_path;
};

enum class RoundPhase { kCollecting, kComputing, kDelivered, kAborted };
std::string_view RoundPhaseName(RoundPhase p);

struct StaRoundResult {
  RoundPhase phase = RoundPhase::kCollecting;
  // Sorted by name; indices of o2o and assignment follow this order.
  std::vector<std::string> orgs;
  SimilarityMatrix o2o;
  ClusterAssignment assignment;
  size_t uploads = 0;
  size_t duplicate_rejections = 0;
  // Every frame the STA received, hex encoded, in arrival order.
  std::vector<std::string> transcript;
  std::string error;
};

class StaServer {
 public:
  static absl::StatusOr<std::unique_ptr<StaServer>> Bind(StaConfig config);
  ~StaServer();

  int port() const;
  // Runs one round to delivery or abort. Clustering failures on the collected
  // uploads come back as an aborted result with `error` set.
  absl::StatusOr<StaRoundResult> ServeRound();

 private:
  StaServer(StaConfig config, Listener listener);

  StaConfig config_;
  Listener listener_;
};

}  // namespace cpb

#endif  // CPB_STA_SERVER_H_
