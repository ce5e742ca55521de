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

#include "cpb/org_client.h"

#include <cstring>
#include <thread>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "glog/logging.h"

namespace cpb {
namespace {

using nlohmann::json;

enum class Step { kRetry, kDone };

std::string ErrorCode(const WireMessage& m) {
  if (m.body.contains("code") && m.body["code"].is_string()) {
    return m.body["code"].get<std::string>();
  }
  return "unknown";
}

bool IsAborted(const WireMessage& m) {
  return m.type == MessageType::kRoundStatus && m.body.contains("phase") &&
         m.body["phase"] == "aborted";
}

std::string AbortReason(const WireMessage& m) {
  if (m.body.contains("error") && m.body["error"].is_string()) {
    return m.body["error"].get<std::string>();
  }
  return "";
}

bool Transient(const absl::Status& s) {
  return absl::IsUnavailable(s) || absl::IsDeadlineExceeded(s);
}

class Attempt {
 public:
  Attempt(const OrgClientConfig& config, const OrgDataset& dataset,
          const OrgSecrets& secrets, const std::vector<uint8_t>& upload_frame,
          OrgRoundOutcome* outcome)
      : config_(config),
        dataset_(dataset),
        secrets_(secrets),
        upload_frame_(upload_frame),
        outcome_(outcome) {}

  // Ok(kRetry) asks the caller to reconnect.
  absl::StatusOr<Step> Run(bool drop_after_upload) {
    auto sock = Socket::Connect(config_.sta_address, config_.timeout);
    if (!sock.ok()) return Classify(sock.status());
    sock_ = *std::move(sock);

    WireMessage hello;
    hello.version = config_.version;
    hello.type = MessageType::kHello;
    hello.round = config_.round;
    hello.body = {{"org", dataset_.org()}};
    if (absl::Status s = sock_.Send(hello); !s.ok()) return Classify(s);
    auto reply = Next();
    if (!reply.ok()) return Classify(reply.status());
    if (reply->type == MessageType::kError) {
      const std::string code = ErrorCode(*reply);
      if (code == "duplicate_org") return Step::kRetry;
      return absl::FailedPreconditionError(
          absl::StrCat("STA refused ", dataset_.org(), ": ", code));
    }
    if (IsAborted(*reply)) return Abort(*reply);

    if (absl::Status s = sock_.SendAll(upload_frame_); !s.ok()) return Classify(s);
    if (drop_after_upload) {
      sock_.Close();
      return Step::kRetry;
    }
    auto ack = Next();
    if (!ack.ok()) return Classify(ack.status());
    if (ack->type == MessageType::kError) {
      return absl::FailedPreconditionError(
          absl::StrCat("upload rejected: ", ErrorCode(*ack)));
    }
    if (IsAborted(*ack)) return Abort(*ack);

    auto clusters = Next();
    if (!clusters.ok()) return Classify(clusters.status());
    if (IsAborted(*clusters)) return Abort(*clusters);
    if (clusters->type != MessageType::kClusters) {
      return absl::DataLossError("expected CLUSTERS");
    }
    auto buffers = Next();
    if (!buffers.ok()) return Classify(buffers.status());
    if (buffers->type != MessageType::kBuffers) {
      return absl::DataLossError("expected BUFFERS");
    }
    return Finish(*clusters, *buffers);
  }

 private:
  absl::StatusOr<WireMessage> Next() {
    auto m = sock_.Receive(Clock::now() + config_.timeout);
    if (m.ok() && m->round != config_.round && m->type != MessageType::kError) {
      return absl::DataLossError(
          absl::StrCat("reply for round ", m->round, ", expected ", config_.round));
    }
    return m;
  }

  absl::StatusOr<Step> Classify(const absl::Status& s) {
    if (Transient(s)) {
      VLOG(1) << dataset_.org() << ": transient " << s;
      return Step::kRetry;
    }
    return s;
  }

  absl::StatusOr<Step> Abort(const WireMessage& m) {
    outcome_->aborted = true;
    outcome_->abort_reason = AbortReason(m);
    return Step::kDone;
  }

  absl::StatusOr<Step> Finish(const WireMessage& clusters,
                              const WireMessage& buffers) {
    try {
      const json& b = clusters.body;
      outcome_->orgs = b.at("orgs").get<std::vector<std::string>>();
      outcome_->index = b.at("index").get<OrgIndex>();
      outcome_->label = b.at("label").get<int>();
      outcome_->outlier = b.at("outlier").get<bool>();
      outcome_->peers = b.at("peers").get<std::vector<OrgIndex>>();
    } catch (const json::exception& e) {
      return absl::DataLossError(absl::StrCat("malformed CLUSTERS: ", e.what()));
    }
    if (outcome_->index >= outcome_->orgs.size() ||
        outcome_->orgs[outcome_->index] != dataset_.org()) {
      return absl::DataLossError("CLUSTERS addressed to another org");
    }
    auto parsed = BuffersFromBody(buffers.body);
    if (!parsed.ok()) return parsed.status();
    auto dec = DecryptShared(outcome_->index, *parsed, secrets_);
    if (!dec.ok()) return dec.status();
    outcome_->element_pool = std::move(dec->element_pool);
    outcome_->prefix_pool = std::move(dec->prefix_pool);
    outcome_->rejected = dec->rejected;
    return Step::kDone;
  }

  const OrgClientConfig& config_;
  const OrgDataset& dataset_;
  const OrgSecrets& secrets_;
  const std::vector<uint8_t>& upload_frame_;
  OrgRoundOutcome* outcome_;
  Socket sock_;
};

}  // namespace

absl::StatusOr<OrgRoundOutcome> RunOrg(const OrgClientConfig& config,
                                       const OrgDataset& dataset,
                                       const SharedKey& key,
                                       std::span<const Day> share_days) {
  if (dataset.org().empty()) return absl::InvalidArgumentError("org name is empty");
  EncryptOptions options;
  options.share_days.assign(share_days.begin(), share_days.end());
  auto enc = EncryptDataset(dataset, key, options);
  if (!enc.ok()) return enc.status();

  WireMessage upload;
  upload.version = config.version;
  upload.type = MessageType::kUpload;
  upload.round = config.round;
  upload.body = UploadToBody(enc->upload);
  const std::vector<uint8_t> frame = EncodeFrame(upload);

  int drops_left = config.drop_after_upload;
  for (int attempt = 1; attempt <= config.max_attempts; ++attempt) {
    OrgRoundOutcome outcome;
    outcome.attempts = attempt;
    Attempt run(config, dataset, enc->secrets, frame, &outcome);
    auto step = run.Run(drops_left > 0);
    if (drops_left > 0) --drops_left;
    if (!step.ok()) return step.status();
    if (*step == Step::kDone) return outcome;
    std::this_thread::sleep_for(config.backoff * std::min(attempt, 10));
  }
  return absl::UnavailableError(absl::StrCat(dataset.org(), ": gave up after ",
                                             config.max_attempts, " attempts"));
}

absl::Status ServeKeyOffer(Listener& listener, const SharedKey& key, size_t peers,
                           std::chrono::milliseconds timeout) {
  const Clock::time_point deadline = Clock::now() + timeout;
  for (size_t served = 0; served < peers;) {
    auto sock = listener.Accept(deadline);
    if (!sock.ok()) {
      if (absl::IsNotFound(sock.status())) {
        return absl::DeadlineExceededError(
            absl::StrCat("key offer: ", served, " of ", peers, " peers served"));
      }
      return sock.status();
    }
    auto hello = sock->Receive(deadline);
    if (!hello.ok() || hello->type != MessageType::kHello) continue;
    WireMessage offer;
    offer.type = MessageType::kKeyOffer;
    offer.round = hello->round;
    offer.body = {{"key", json::binary(std::vector<uint8_t>(key.bytes.begin(),
                                                            key.bytes.end()))}};
    if (sock->Send(offer).ok()) ++served;
  }
  return absl::OkStatus();
}

absl::StatusOr<SharedKey> FetchKeyOffer(std::string_view address,
                                        std::chrono::milliseconds timeout) {
  auto sock = Socket::Connect(address, timeout);
  if (!sock.ok()) return sock.status();
  WireMessage hello;
  hello.type = MessageType::kHello;
  if (absl::Status s = sock->Send(hello); !s.ok()) return s;
  auto offer = sock->Receive(Clock::now() + timeout);
  if (!offer.ok()) return offer.status();
  if (offer->type != MessageType::kKeyOffer || !offer->body.contains("key") ||
      !offer->body["key"].is_binary() ||
      offer->body["key"].get_binary().size() != kSharedKeyBytes) {
    return absl::DataLossError("malformed KEY_OFFER");
  }
  SharedKey key;
  std::memcpy(key.bytes.data(), offer->body["key"].get_binary().data(),
              kSharedKeyBytes);
  return key;
}

}  // namespace cpb
