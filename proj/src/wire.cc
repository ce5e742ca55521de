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

#include "cpb/wire.h"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "absl/strings/str_cat.h"
#include "cpb/strings.h"

namespace cpb {
namespace {

using nlohmann::json;

constexpr MessageType kAllTypes[] = {
    MessageType::kHello,       MessageType::kKeyOffer, MessageType::kUpload,
    MessageType::kRoundStatus, MessageType::kClusters, MessageType::kBuffers,
    MessageType::kError,
};

absl::Status Errno(std::string_view what) {
  return absl::UnavailableError(
      absl::StrCat(Sv(what), ": ", std::strerror(errno)));
}

int RemainingMs(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
      deadline - Clock::now());
  if (left.count() <= 0) return 0;
  return static_cast<int>(std::min<int64_t>(left.count(), 1 << 30));
}

template <size_t N>
json Concat(const std::vector<std::array<uint8_t, N>>& items) {
  std::vector<uint8_t> out;
  out.reserve(items.size() * N);
  for (const auto& a : items) out.insert(out.end(), a.begin(), a.end());
  return json::binary(std::move(out));
}

template <size_t N>
absl::StatusOr<std::vector<std::array<uint8_t, N>>> Split(const json& blob) {
  if (!blob.is_binary()) return absl::DataLossError("expected byte string");
  const auto& bytes = blob.get_binary();
  if (bytes.size() % N != 0) {
    return absl::DataLossError(
        absl::StrCat("byte string length ", bytes.size(), " not a multiple of ", N));
  }
  std::vector<std::array<uint8_t, N>> out(bytes.size() / N);
  if (!out.empty()) std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

json SectionToJson(const UploadSection& s) {
  return json{{"s", Concat(s.s)}, {"e", Concat(s.e)}};
}

absl::StatusOr<UploadSection> SectionFromJson(const json& j) {
  UploadSection out;
  auto s = Split<kBlockBytes>(j.at("s"));
  if (!s.ok()) return s.status();
  auto e = Split<kCiphertextBytes>(j.at("e"));
  if (!e.ok()) return e.status();
  if (s->size() != e->size()) return absl::DataLossError("S/E length mismatch");
  out.s = *std::move(s);
  out.e = *std::move(e);
  return out;
}

}  // namespace

std::string_view MessageTypeName(MessageType t) {
  switch (t) {
    case MessageType::kHello:
      return "HELLO";
    case MessageType::kKeyOffer:
      return "KEY_OFFER";
    case MessageType::kUpload:
      return "UPLOAD";
    case MessageType::kRoundStatus:
      return "ROUND_STATUS";
    case MessageType::kClusters:
      return "CLUSTERS";
    case MessageType::kBuffers:
      return "BUFFERS";
    case MessageType::kError:
      return "ERROR";
  }
  return "?";
}

absl::StatusOr<MessageType> ParseMessageType(std::string_view name) {
  for (MessageType t : kAllTypes) {
    if (MessageTypeName(t) == name) return t;
  }
  return absl::DataLossError(absl::StrCat("unknown message type '", Sv(name), "'"));
}

std::vector<uint8_t> EncodeFrame(const WireMessage& m) {
  json record = {{"v", m.version},
                 {"type", std::string(MessageTypeName(m.type))},
                 {"round", m.round},
                 {"body", m.body}};
  std::vector<uint8_t> body = json::to_cbor(record);
  std::vector<uint8_t> frame(4 + body.size());
  const uint32_t len = static_cast<uint32_t>(body.size());
  frame[0] = static_cast<uint8_t>(len >> 24);
  frame[1] = static_cast<uint8_t>(len >> 16);
  frame[2] = static_cast<uint8_t>(len >> 8);
  frame[3] = static_cast<uint8_t>(len);
  std::memcpy(frame.data() + 4, body.data(), body.size());
  return frame;
}

absl::StatusOr<WireMessage> DecodeFrameBody(std::span<const uint8_t> body) {
  json record = json::from_cbor(body.begin(), body.end(), /*strict=*/true,
                                /*allow_exceptions=*/false);
  if (record.is_discarded() || !record.is_object()) {
    return absl::DataLossError("frame is not a CBOR map");
  }
  try {
    WireMessage m;
    m.version = record.at("v").get<int>();
    auto type = ParseMessageType(record.at("type").get<std::string>());
    if (!type.ok()) return type.status();
    m.type = *type;
    m.round = record.at("round").get<uint64_t>();
    m.body = record.at("body");
    return m;
  } catch (const json::exception& e) {
    return absl::DataLossError(absl::StrCat("malformed frame: ", e.what()));
  }
}

json UploadToBody(const Upload& u) {
  return json{{"org", u.org},
              {"elements", SectionToJson(u.elements)},
              {"prefixes", SectionToJson(u.prefixes)}};
}

absl::StatusOr<Upload> UploadFromBody(const json& body) {
  try {
    Upload u;
    u.org = body.at("org").get<std::string>();
    auto elements = SectionFromJson(body.at("elements"));
    if (!elements.ok()) return elements.status();
    auto prefixes = SectionFromJson(body.at("prefixes"));
    if (!prefixes.ok()) return prefixes.status();
    u.elements = *std::move(elements);
    u.prefixes = *std::move(prefixes);
    return u;
  } catch (const json::exception& e) {
    return absl::DataLossError(absl::StrCat("malformed UPLOAD: ", e.what()));
  }
}

json BuffersToBody(std::span<const PairBuffer> buffers) {
  json list = json::array();
  for (const PairBuffer& b : buffers) {
    std::vector<Block> s;
    std::vector<Ciphertext> e;
    for (const BufferEntry& entry : b.entries) {
      s.push_back(entry.prp);
      e.push_back(entry.ciphertext);
    }
    list.push_back({{"receiver", b.receiver},
                    {"source", b.source},
                    {"section", b.section == Section::kElement ? "element" : "prefix"},
                    {"s", Concat(s)},
                    {"e", Concat(e)}});
  }
  return json{{"buffers", std::move(list)}};
}

absl::StatusOr<std::vector<PairBuffer>> BuffersFromBody(const json& body) {
  try {
    std::vector<PairBuffer> out;
    for (const json& item : body.at("buffers")) {
      PairBuffer b;
      b.receiver = item.at("receiver").get<OrgIndex>();
      b.source = item.at("source").get<OrgIndex>();
      const std::string section = item.at("section").get<std::string>();
      if (section == "element") {
        b.section = Section::kElement;
      } else if (section == "prefix") {
        b.section = Section::kPrefix;
      } else {
        return absl::DataLossError(absl::StrCat("unknown section '", section, "'"));
      }
      auto s = Split<kBlockBytes>(item.at("s"));
      if (!s.ok()) return s.status();
      auto e = Split<kCiphertextBytes>(item.at("e"));
      if (!e.ok()) return e.status();
      if (s->size() != e->size()) return absl::DataLossError("buffer S/E mismatch");
      for (size_t i = 0; i < s->size(); ++i) b.entries.push_back({(*s)[i], (*e)[i]});
      out.push_back(std::move(b));
    }
    return out;
  } catch (const json::exception& e) {
    return absl::DataLossError(absl::StrCat("malformed BUFFERS: ", e.what()));
  }
}

WireMessage ErrorMessage(uint64_t round, std::string_view code,
                         std::string_view detail) {
  WireMessage m;
  m.type = MessageType::kError;
  m.round = round;
  m.body = {{"code", std::string(code)}, {"detail", std::string(detail)}};
  return m;
}

absl::StatusOr<std::pair<std::string, int>> SplitHostPort(std::string_view address) {
  size_t colon = address.rfind(':');
  if (colon == std::string_view::npos) {
    return absl::InvalidArgumentError(
        absl::StrCat("address '", Sv(address), "' lacks a port"));
  }
  std::string_view port_text = address.substr(colon + 1);
  int port = -1;
  auto [ptr, ec] =
      std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port < 0 ||
      port > 65535) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad port in address '", Sv(address), "'"));
  }
  std::string host(address.substr(0, colon));
  if (host.empty()) host = "0.0.0.0";
  return std::make_pair(host, port);
}

// ---- Socket ----

Socket& Socket::operator=(Socket&& o) noexcept {
  if (this != &o) {
    Close();
    fd_ = std::exchange(o.fd_, -1);
  }
  return *this;
}

void Socket::Close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

absl::StatusOr<Socket> Socket::Connect(std::string_view address,
                                       std::chrono::milliseconds timeout) {
  auto hp = SplitHostPort(address);
  if (!hp.ok()) return hp.status();
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  std::string port = std::to_string(hp->second);
  if (int rc = getaddrinfo(hp->first.c_str(), port.c_str(), &hints, &res); rc != 0) {
    return absl::UnavailableError(
        absl::StrCat("resolve ", hp->first, ": ", gai_strerror(rc)));
  }
  Socket sock(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
  if (!sock.valid()) {
    freeaddrinfo(res);
    return Errno("socket");
  }
  int flags = fcntl(sock.fd_, F_GETFL, 0);
  fcntl(sock.fd_, F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(sock.fd_, res->ai_addr, res->ai_addrlen);
  freeaddrinfo(res);
  if (rc != 0) {
    if (errno != EINPROGRESS) return Errno("connect");
    pollfd p{sock.fd_, POLLOUT, 0};
    rc = ::poll(&p, 1, static_cast<int>(timeout.count()));
    if (rc == 0) return absl::DeadlineExceededError("connect timed out");
    int err = 0;
    socklen_t len = sizeof(err);
    getsockopt(sock.fd_, SOL_SOCKET, SO_ERROR, &err, &len);
    if (rc < 0 || err != 0) {
      errno = err != 0 ? err : errno;
      return Errno("connect");
    }
  }
  fcntl(sock.fd_, F_SETFL, flags);
  int one = 1;
  setsockopt(sock.fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return sock;
}

absl::Status Socket::SendAll(std::span<const uint8_t> bytes) {
  size_t sent = 0;
  while (sent < bytes.size()) {
    ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return Errno("send");
    }
    sent += static_cast<size_t>(n);
  }
  return absl::OkStatus();
}

absl::Status Socket::Send(const WireMessage& m) { return SendAll(EncodeFrame(m)); }

absl::Status Socket::RecvExact(uint8_t* out, size_t n, Clock::time_point deadline) {
  size_t got = 0;
  while (got < n) {
    pollfd p{fd_, POLLIN, 0};
    int rc = ::poll(&p, 1, RemainingMs(deadline));
    if (rc < 0) {
      if (errno == EINTR) continue;
      return Errno("poll");
    }
    if (rc == 0) return absl::DeadlineExceededError("receive timed out");
    ssize_t r = ::recv(fd_, out + got, n - got, 0);
    if (r == 0) return absl::UnavailableError("peer closed the connection");
    if (r < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      return Errno("recv");
    }
    got += static_cast<size_t>(r);
  }
  return absl::OkStatus();
}

absl::StatusOr<WireMessage> Socket::Receive(Clock::time_point deadline,
                                            std::vector<uint8_t>* raw) {
  uint8_t header[4];
  if (absl::Status s = RecvExact(header, 4, deadline); !s.ok()) return s;
  const uint32_t len = (uint32_t{header[0]} << 24) | (uint32_t{header[1]} << 16) |
                       (uint32_t{header[2]} << 8) | header[3];
  if (len > kMaxFrameBytes) {
    return absl::DataLossError(absl::StrCat("frame of ", len, " bytes too large"));
  }
  std::vector<uint8_t> body(len);
  if (absl::Status s = RecvExact(body.data(), len, deadline); !s.ok()) return s;
  if (raw != nullptr) {
    raw->assign(header, header + 4);
    raw->insert(raw->end(), body.begin(), body.end());
  }
  return DecodeFrameBody(body);
}

bool Socket::PeerClosed() {
  if (fd_ < 0) return true;
  pollfd p{fd_, POLLIN, 0};
  if (::poll(&p, 1, 0) <= 0) return false;
  if (p.revents & (POLLERR | POLLNVAL)) return true;
  uint8_t byte;
  ssize_t r = ::recv(fd_, &byte, 1, MSG_PEEK | MSG_DONTWAIT);
  if (r == 0) return true;
  if (r < 0) return errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR;
  return false;
}

// ---- Listener ----

Listener& Listener::operator=(Listener&& o) noexcept {
  if (this != &o) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(o.fd_, -1);
    port_ = o.port_;
  }
  return *this;
}

Listener::~Listener() {
  if (fd_ >= 0) ::close(fd_);
}

absl::StatusOr<Listener> Listener::Bind(std::string_view address) {
  auto hp = SplitHostPort(address);
  if (!hp.ok()) return hp.status();
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<uint16_t>(hp->second));
  if (inet_pton(AF_INET, hp->first.c_str(), &addr.sin_addr) != 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("listen host must be an IPv4 literal, got ", hp->first));
  }
  Listener l;
  l.fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (l.fd_ < 0) return Errno("socket");
  int one = 1;
  setsockopt(l.fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(l.fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    return Errno("bind");
  }
  if (::listen(l.fd_, 256) != 0) return Errno("listen");
  socklen_t len = sizeof(addr);
  getsockname(l.fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  l.port_ = ntohs(addr.sin_port);
  return l;
}

absl::StatusOr<Socket> Listener::Accept(Clock::time_point deadline) {
  pollfd p{fd_, POLLIN, 0};
  int rc = ::poll(&p, 1, RemainingMs(deadline));
  if (rc < 0 && errno != EINTR) return Errno("poll");
  if (rc <= 0) return absl::NotFoundError("no pending connection");
  int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) return Errno("accept");
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return Socket(fd);
}

}  // namespace cpb
