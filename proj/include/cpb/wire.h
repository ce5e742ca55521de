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

#ifndef CPB_WIRE_H_
#define CPB_WIRE_H_

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "cpb/privacy.h"
#include "json.hpp"

namespace cpb {

inline constexpr int kProtocolVersion = 1;
inline constexpr uint32_t kMaxFrameBytes = 1u << 30;

enum class MessageType {
  kHello,
  kKeyOffer,
  kUpload,
  kRoundStatus,
  kClusters,
  kBuffers,
  kError,
};

std::string_view MessageTypeName(MessageType t);
absl::StatusOr<MessageType> ParseMessageType(std::string_view name);

struct WireMessage {
  int version = kProtocolVersion;
  MessageType type = MessageType::kError;
  uint64_t round = 0;
  nlohmann::json body = nlohmann::json::object();
};

// 4-byte big-endian length followed by the CBOR record
// {"v", "type", "round", "body"}.
std::vector<uint8_t> EncodeFrame(const WireMessage& m);
// Decodes the CBOR record of one frame (length prefix removed). Version is
// reported, not checked.
absl::StatusOr<WireMessage> DecodeFrameBody(std::span<const uint8_t> body);

// Typed bodies. S and E travel as concatenated byte strings.
nlohmann::json UploadToBody(const Upload& u);
absl::StatusOr<Upload> UploadFromBody(const nlohmann::json& body);
nlohmann::json BuffersToBody(std::span<const PairBuffer> buffers);
absl::StatusOr<std::vector<PairBuffer>> BuffersFromBody(const nlohmann::json& body);

WireMessage ErrorMessage(uint64_t round, std::string_view code,
                         std::string_view detail);

using Clock = std::chrono::steady_clock;

// Blocking TCP stream with deadline-bounded reads.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { Close(); }

  // `address` is "host:port".
  static absl::StatusOr<Socket> Connect(std::string_view address,
                                        std::chrono::milliseconds timeout);

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  void Close();

  absl::Status SendAll(std::span<const uint8_t> bytes);
  absl::Status Send(const WireMessage& m);
  // Reads one frame; `raw` receives the bytes as they came off the wire.
  absl::StatusOr<WireMessage> Receive(Clock::time_point deadline,
                                      std::vector<uint8_t>* raw = nullptr);
  // True once the peer has closed or reset the stream. Never blocks.
  bool PeerClosed();

 private:
  absl::Status RecvExact(uint8_t* out, size_t n, Clock::time_point deadline);
  int fd_ = -1;
};

class Listener {
 public:
  Listener() = default;
  Listener(Listener&& o) noexcept
      : fd_(std::exchange(o.fd_, -1)), port_(o.port_) {}
  Listener& operator=(Listener&& o) noexcept;
  ~Listener();

  // `address` is "host:port"; port 0 picks a free one.
  static absl::StatusOr<Listener> Bind(std::string_view address);
  int port() const { return port_; }
  // Returns NotFound when nothing arrived before the deadline.
  absl::StatusOr<Socket> Accept(Clock::time_point deadline);

 private:
  int fd_ = -1;
  int port_ = 0;
};

absl::StatusOr<std::pair<std::string, int>> SplitHostPort(std::string_view address);

}  // namespace cpb

#endif  // CPB_WIRE_H_
