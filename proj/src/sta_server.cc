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

#include "cpb/sta_server.h"

#include <sys/socket.h>

#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "absl/container/flat_hash_map.h"
#include "absl/container/flat_hash_set.h"
#include "absl/strings/str_cat.h"
#include "glog/logging.h"

namespace cpb {
namespace {

using nlohmann::json;
using std::chrono::milliseconds;

constexpr milliseconds kPollInterval{25};

WireMessage Status(uint64_t round, RoundPhase phase, json extra = json::object()) {
  WireMessage m;
  m.type = MessageType::kRoundStatus;
  m.round = round;
  m.body = std::move(extra);
  m.body["phase"] = std::string(RoundPhaseName(phase));
  return m;
}

}  // namespace

std::string_view RoundPhaseName(RoundPhase p) {
  switch (p) {
    case RoundPhase::kCollecting:
      return "collecting";
    case RoundPhase::kComputing:
      return "computing";
    case RoundPhase::kDelivered:
      return "delivered";
    case RoundPhase::kAborted:
      return "aborted";
  }
  return "?";
}

namespace {

struct RoundState {
  std::mutex mu;
  std::condition_variable cv;
  RoundPhase phase = RoundPhase::kCollecting;
  // Org name -> id of the connection currently speaking for it.
  absl::flat_hash_map<std::string, uint64_t> live;
  std::map<std::string, Upload> uploads;
  absl::flat_hash_set<std::string> delivered;
  absl::flat_hash_map<std::string, std::pair<WireMessage, WireMessage>> results;
  absl::flat_hash_map<uint64_t, int> open_fds;
  std::vector<std::string> transcript;
  size_t duplicate_rejections = 0;
  std::string error;

  void Release(const std::string& org, uint64_t conn) {
    auto it = live.find(org);
    if (it != live.end() && it->second == conn) live.erase(it);
  }
};

class Connection {
 public:
  Connection(const StaConfig& config, RoundState& st, Socket sock,
             uint64_t id)
      : config_(config), st_(st), sock_(std::move(sock)), id_(id) {}

  ~Connection() {
    std::lock_guard<std::mutex> lock(st_.mu);
    if (!org_.empty()) st_.Release(org_, id_);
    st_.open_fds.erase(id_);
    st_.cv.notify_all();
  }

  void Run() {
    auto hello = Receive();
    if (!hello.ok()) return;
    if (hello->type != MessageType::kHello) {
      Reply(ErrorMessage(config_.round, "unexpected", "expected HELLO"));
      return;
    }
    if (hello->version != kProtocolVersion) {
      Reply(ErrorMessage(config_.round, "version",
                         absl::StrCat("server speaks version ", kProtocolVersion)));
      return;
    }
    if (hello->round != config_.round) {
      Reply(ErrorMessage(config_.round, "round",
                         absl::StrCat("server runs round ", config_.round)));
      return;
    }
    std::string org;
    if (hello->body.contains("org") && hello->body["org"].is_string()) {
      org = hello->body["org"].get<std::string>();
    }
    if (org.empty()) {
      Reply(ErrorMessage(config_.round, "malformed", "HELLO lacks org"));
      return;
    }
    if (!Register(org)) return;

    auto upload_msg = Receive();
    if (!upload_msg.ok()) return;
    if (upload_msg->type != MessageType::kUpload) {
      Reply(ErrorMessage(config_.round, "unexpected", "expected UPLOAD"));
      return;
    }
    auto upload = UploadFromBody(upload_msg->body);
    if (!upload.ok() || upload->org != org) {
      Reply(ErrorMessage(config_.round, "malformed",
                         upload.ok() ? std::string("UPLOAD org differs from HELLO")
                                     : upload.status().ToString()));
      return;
    }
    RoundPhase phase;
    {
      std::lock_guard<std::mutex> lock(st_.mu);
      // Retries resend the same upload; only the first one counts.
      if (st_.phase == RoundPhase::kCollecting && !st_.uploads.contains(org)) {
        st_.uploads.emplace(org, *std::move(upload));
        st_.cv.notify_all();
      }
      phase = st_.phase;
    }
    if (!Reply(Status(config_.round, phase, {{"ack", true}}))) return;

    std::unique_lock<std::mutex> lock(st_.mu);
    while (st_.phase == RoundPhase::kCollecting ||
           st_.phase == RoundPhase::kComputing) {
      st_.cv.wait_for(lock, kPollInterval);
      if (st_.phase == RoundPhase::kDelivered || st_.phase == RoundPhase::kAborted) {
        break;
      }
      lock.unlock();
      bool closed = sock_.PeerClosed();
      lock.lock();
      if (closed) return;
    }
    if (st_.phase == RoundPhase::kAborted) {
      WireMessage status = Status(config_.round, RoundPhase::kAborted,
                                  {{"error", st_.error}});
      lock.unlock();
      Reply(status);
      return;
    }
    auto it = st_.results.find(org);
    if (it == st_.results.end()) return;
    auto [clusters, buffers] = it->second;
    lock.unlock();
    if (Reply(clusters) && Reply(buffers)) {
      std::lock_guard<std::mutex> guard(st_.mu);
      st_.delivered.insert(org);
      st_.cv.notify_all();
    }
  }

 private:
  absl::StatusOr<WireMessage> Receive() {
    std::vector<uint8_t> raw;
    auto m = sock_.Receive(Clock::now() + config_.timeout, &raw);
    if (!raw.empty()) {
      std::lock_guard<std::mutex> lock(st_.mu);
      st_.transcript.push_back(HexEncode(raw));
    }
    if (!m.ok()) VLOG(1) << "connection " << id_ << ": " << m.status();
    return m;
  }

  bool Reply(const WireMessage& m) {
    absl::Status s = sock_.Send(m);
    if (!s.ok()) VLOG(1) << "connection " << id_ << ": " << s;
    return s.ok();
  }

  bool Register(const std::string& org) {
    std::unique_lock<std::mutex> lock(st_.mu);
    if (!config_.org_names.empty() &&
        std::find(config_.org_names.begin(), config_.org_names.end(), org) ==
            config_.org_names.end()) {
      lock.unlock();
      Reply(ErrorMessage(config_.round, "unknown_org", org));
      return false;
    }
    if (st_.live.contains(org)) {
      ++st_.duplicate_rejections;
      lock.unlock();
      LOG(WARNING) << "duplicate connection for " << org;
      Reply(ErrorMessage(config_.round, "duplicate_org", org));
      return false;
    }
    if (!st_.uploads.contains(org)) {
      absl::flat_hash_set<std::string> known;
      for (const auto& [name, u] : st_.uploads) known.insert(name);
      for (const auto& [name, c] : st_.live) known.insert(name);
      if (known.size() >= config_.expected_orgs) {
        lock.unlock();
        Reply(ErrorMessage(config_.round, "round_full", org));
        return false;
      }
    }
    if (st_.phase == RoundPhase::kAborted) {
      WireMessage status =
          Status(config_.round, RoundPhase::kAborted, {{"error", st_.error}});
      lock.unlock();
      Reply(status);
      return false;
    }
    st_.live[org] = id_;
    org_ = org;
    WireMessage status = Status(config_.round, st_.phase,
                                {{"registered", st_.live.size()}});
    lock.unlock();
    return Reply(status);
  }

  const StaConfig& config_;
  RoundState& st_;
  Socket sock_;
  uint64_t id_;
  std::string org_;
};

}  // namespace

StaServer::StaServer(StaConfig config, Listener listener)
    : config_(std::move(config)), listener_(std::move(listener)) {}

StaServer::~StaServer() = default;

absl::StatusOr<std::unique_ptr<StaServer>> StaServer::Bind(StaConfig config) {
  if (config.expected_orgs < 1) {
    return absl::InvalidArgumentError("STA needs at least one expected org");
  }
  if (!config.org_names.empty() && config.org_names.size() != config.expected_orgs) {
    return absl::InvalidArgumentError("org allow-list size differs from expected orgs");
  }
  auto listener = Listener::Bind(config.listen);
  if (!listener.ok()) return listener.status();
  return std::unique_ptr<StaServer>(
      new StaServer(std::move(config), *std::move(listener)));
}

int StaServer::port() const { return listener_.port(); }

absl::StatusOr<StaRoundResult> StaServer::ServeRound() {
  RoundState st;
  StaRoundResult result;
  std::vector<std::thread> threads;
  uint64_t next_id = 0;
  Clock::time_point deadline = Clock::now() + config_.timeout;

  while (true) {
    auto sock = listener_.Accept(Clock::now() + kPollInterval);
    if (sock.ok()) {
      const uint64_t id = next_id++;
      {
        std::lock_guard<std::mutex> lock(st.mu);
        st.open_fds[id] = sock->fd();
      }
      threads.emplace_back([this, &st, s = *std::move(sock), id]() mutable {
        Connection(config_, st, std::move(s), id).Run();
      });
    } else if (!absl::IsNotFound(sock.status())) {
      LOG(WARNING) << "accept: " << sock.status();
    }

    std::unique_lock<std::mutex> lock(st.mu);
    if (st.phase == RoundPhase::kCollecting &&
        st.uploads.size() == config_.expected_orgs) {
      st.phase = RoundPhase::kComputing;
      std::vector<Upload> uploads;
      for (const auto& [name, u] : st.uploads) uploads.push_back(u);
      lock.unlock();

      for (const Upload& u : uploads) result.orgs.push_back(u.org);
      auto sta = StaComputation::Run(std::move(uploads));
      absl::StatusOr<ClusterAssignment> assignment =
          sta.ok() ? Cluster(sta->o2o(), config_.clustering)
                   : absl::StatusOr<ClusterAssignment>(sta.status());
      absl::flat_hash_map<std::string, std::pair<WireMessage, WireMessage>> results;
      if (assignment.ok()) {
        for (OrgIndex i = 0; i < result.orgs.size(); ++i) {
          std::vector<OrgIndex> peers = assignment->Peers(i);
          WireMessage clusters;
          clusters.type = MessageType::kClusters;
          clusters.round = config_.round;
          clusters.body = {
              {"org", result.orgs[i]},
              {"index", i},
              {"orgs", result.orgs},
              {"label", assignment->mode == ClusterAssignment::Mode::kPartition
                            ? assignment->label[i]
                            : -1},
              {"outlier", static_cast<bool>(assignment->outlier[i])},
              {"peers", peers}};
          WireMessage buffers;
          buffers.type = MessageType::kBuffers;
          buffers.round = config_.round;
          buffers.body = BuffersToBody(sta->BuffersFor(i, peers));
          results.emplace(result.orgs[i],
                          std::make_pair(std::move(clusters), std::move(buffers)));
        }
      }

      lock.lock();
      if (assignment.ok()) {
        result.o2o = sta->o2o();
        result.assignment = *std::move(assignment);
        st.results = std::move(results);
        st.phase = RoundPhase::kDelivered;
      } else {
        st.error = std::string(assignment.status().message());
        LOG(ERROR) << "round " << config_.round << " aborted: " << st.error;
        st.phase = RoundPhase::kAborted;
      }
      deadline = Clock::now() + config_.timeout;
      st.cv.notify_all();
    }
    if (st.phase == RoundPhase::kCollecting && Clock::now() > deadline) {
      st.error = absl::StrCat("timeout with ", st.uploads.size(), " of ",
                              config_.expected_orgs, " uploads");
      LOG(WARNING) << "round " << config_.round << " aborted: " << st.error;
      st.phase = RoundPhase::kAborted;
      deadline = Clock::now() + config_.timeout;
      st.cv.notify_all();
    }
    const bool finished =
        (st.phase == RoundPhase::kDelivered &&
         st.delivered.size() == config_.expected_orgs) ||
        (st.phase == RoundPhase::kAborted && st.live.empty()) ||
        (st.phase != RoundPhase::kCollecting && Clock::now() > deadline);
    if (finished) {
      // Unblock handlers still reading from idle peers.
      for (const auto& [id, fd] : st.open_fds) ::shutdown(fd, SHUT_RDWR);
      break;
    }
  }
  for (std::thread& t : threads) t.join();

  std::lock_guard<std::mutex> lock(st.mu);
  result.phase = st.phase;
  result.uploads = st.uploads.size();
  result.duplicate_rejections = st.duplicate_rejections;
  result.transcript = std::move(st.transcript);
  result.error = st.error;
  if (!config_.transcript_path.empty()) {
    std::ofstream out(config_.transcript_path, std::ios::app);
    for (const std::string& line : result.transcript) out << line << "\n";
    if (!out) {
      return absl::UnavailableError(
          absl::StrCat("cannot write transcript ", config_.transcript_path));
    }
  }
  return result;
}

}  // namespace cpb
