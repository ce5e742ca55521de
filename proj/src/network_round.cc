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

#include "cpb/network_round.h"

#include <thread>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "cpb/org_client.h"
#include "cpb/sta_server.h"

namespace cpb {

absl::StatusOr<NetworkRoundResult> RunNetworkedRound(
    std::span<const OrgDataset> datasets, const SharedKey& key,
    const ClusteringSpec& clustering, std::span<const Day> share_days,
    const NetworkRoundOptions& options) {
  StaConfig config;
  config.listen = "127.0.0.1:0";
  config.expected_orgs = datasets.size();
  for (const OrgDataset& d : datasets) config.org_names.push_back(d.org());
  config.clustering = clustering;
  config.round = options.round;
  config.timeout = options.timeout;
  config.transcript_path = options.transcript_path;
  auto server = StaServer::Bind(config);
  if (!server.ok()) return server.status();

  absl::StatusOr<StaRoundResult> sta_result = absl::UnknownError("not run");
  std::thread sta_thread([&] { sta_result = (*server)->ServeRound(); });

  OrgClientConfig client;
  client.sta_address = absl::StrCat("127.0.0.1:", (*server)->port());
  client.round = options.round;
  client.timeout = options.timeout;
  std::vector<absl::StatusOr<OrgRoundOutcome>> outcomes(
      datasets.size(), absl::UnknownError("not run"));
  std::vector<std::thread> clients;
  for (size_t i = 0; i < datasets.size(); ++i) {
    clients.emplace_back([&, i] {
      outcomes[i] = RunOrg(client, datasets[i], key, share_days);
    });
  }
  for (std::thread& t : clients) t.join();
  sta_thread.join();

  if (!sta_result.ok()) return sta_result.status();
  if (sta_result->phase != RoundPhase::kDelivered) {
    return absl::AbortedError(absl::StrCat("round aborted: ", sta_result->error));
  }
  NetworkRoundResult result;
  result.output.orgs = sta_result->orgs;
  result.output.o2o = sta_result->o2o;
  result.output.assignment = sta_result->assignment;
  result.output.element_pools.resize(datasets.size());
  result.output.prefix_pools.resize(datasets.size());
  for (size_t i = 0; i < datasets.size(); ++i) {
    if (!outcomes[i].ok()) return outcomes[i].status();
    const OrgRoundOutcome& o = *outcomes[i];
    if (o.aborted) return absl::AbortedError(absl::StrCat("round aborted: ", o.abort_reason));
    if (o.index >= datasets.size()) return absl::DataLossError("bad org index");
    result.output.element_pools[o.index] = o.element_pool;
    result.output.prefix_pools[o.index] = o.prefix_pool;
    result.output.rejected += o.rejected;
  }
  for (const std::string& line : sta_result->transcript) {
    result.sta_bytes_received += line.size() / 2;
  }
  result.transcript = std::move(sta_result->transcript);
  return result;
}

}  // namespace cpb
