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

#ifndef CPB_ORG_CLIENT_H_
#define CPB_ORG_CLIENT_H_

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "cpb/crypto.h"
#include "cpb/sharing.h"
#include "cpb/types.h"
#include "cpb/wire.h"

namespace cpb {

struct OrgClientConfig {
  std::string sta_address;
  uint64_t round = 0;
  std::chrono::milliseconds timeout{30000};
  int max_attempts = 20;
  std::chrono::milliseconds backoff{50};
  // Version announced in every frame. Only tests change it.
  int version = kProtocolVersion;
  // Test hook: drop the connection right after sending UPLOAD on this many
  // attempts, before the acknowledgment arrives.
  int drop_after_upload = 0;
};

struct OrgRoundOutcome {
  bool aborted = false;
  std::string abort_reason;
  // Remaining fields are set only when the round was delivered.
  std::vector<std::string> orgs;
  OrgIndex index = 0;
  int label = -1;
  bool outlier = false;
  std::vector<OrgIndex> peers;
  SharedPool element_pool;
  SharedPool prefix_pool;
  uint64_t rejected = 0;
  int attempts = 0;
};

// Encrypts `dataset` once, then uploads it and collects the round's buffers,
// reconnecting after transient failures. A version mismatch is a hard
// FailedPrecondition error.
absl::StatusOr<OrgRoundOutcome> RunOrg(const OrgClientConfig& config,
                                       const OrgDataset& dataset,
                                       const SharedKey& key,
                                       std::span<const Day> share_days);

// Org-to-org key distribution, on connections the STA is not part of.
absl::Status ServeKeyOffer(Listener& listener, const SharedKey& key,
                           size_t peers, std::chrono::milliseconds timeout);
absl::StatusOr<SharedKey> FetchKeyOffer(std::string_view address,
                                        std::chrono::milliseconds timeout);

}  // namespace cpb

#endif  // CPB_ORG_CLIENT_H_
