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

#include <thread>

#include "gtest/gtest.h"

namespace cpb {
namespace {

using std::chrono::milliseconds;

Block B(uint8_t v) {
  Block b{};
  b.fill(v);
  return b;
}

Ciphertext C(uint8_t v) {
  Ciphertext c{};
  c.fill(v);
  return c;
}

TEST(FrameTest, RoundTrip) {
  WireMessage m;
  m.type = MessageType::kRoundStatus;
  m.round = 42;
  m.body = {{"phase", "collecting"}, {"registered", 3}};
  std::vector<uint8_t> frame = EncodeFrame(m);
  const uint32_t len = (uint32_t{frame[0]} << 24) | (uint32_t{frame[1]} << 16) |
                       (uint32_t{frame[2]} << 8) | frame[3];
  ASSERT_EQ(len + 4, frame.size());
  auto back = DecodeFrameBody(std::span(frame).subspan(4));
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->version, kProtocolVersion);
  EXPECT_EQ(back->type, MessageType::kRoundStatus);
  EXPECT_EQ(back->round, 42u);
  EXPECT_EQ(back->body, m.body);
}

TEST(FrameTest, MalformedBodies) {
  std::vector<uint8_t> junk = {0xff, 0x00, 0x13};
  EXPECT_EQ(DecodeFrameBody(junk).status().code(), absl::StatusCode::kDataLoss);
  auto not_map = nlohmann::json::to_cbor(nlohmann::json::array({1, 2}));
  EXPECT_FALSE(DecodeFrameBody(not_map).ok());
  auto bad_type = nlohmann::json::to_cbor(
      {{"v", 1}, {"type", "GOSSIP"}, {"round", 0}, {"body", {}}});
  EXPECT_FALSE(DecodeFrameBody(bad_type).ok());
  auto no_round = nlohmann::json::to_cbor({{"v", 1}, {"type", "HELLO"}, {"body", {}}});
  EXPECT_FALSE(DecodeFrameBody(no_round).ok());
}

TEST(FrameTest, TypeNames) {
  for (MessageType t : {MessageType::kHello, MessageType::kKeyOffer, MessageType::kUpload,
                        MessageType::kRoundStatus, MessageType::kClusters,
                        MessageType::kBuffers, MessageType::kError}) {
    EXPECT_EQ(*ParseMessageType(MessageTypeName(t)), t);
  }
}

TEST(BodyTest, UploadRoundTrip) {
  Upload u;
  u.org = "acme";
  u.elements.s = {B(1), B(2)};
  u.elements.e = {C(3), C(4)};
  u.prefixes.s = {B(5)};
  u.prefixes.e = {C(6)};
  auto back = UploadFromBody(UploadToBody(u));
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, u);

  nlohmann::json body = UploadToBody(u);
  body["elements"]["s"] = nlohmann::json::binary({1, 2, 3});
  EXPECT_EQ(UploadFromBody(body).status().code(), absl::StatusCode::kDataLoss);
  body = UploadToBody(u);
  body["prefixes"]["e"] = nlohmann::json::binary({});
  EXPECT_FALSE(UploadFromBody(body).ok());
  body.erase("org");
  EXPECT_FALSE(UploadFromBody(body).ok());
}

TEST(BodyTest, BuffersRoundTrip) {
  std::vector<PairBuffer> buffers(2);
  buffers[0] = {.receiver = 1, .source = 0, .section = Section::kElement,
                .entries = {{B(1), C(1)}, {B(2), C(2)}}};
  buffers[1] = {.receiver = 1, .source = 2, .section = Section::kPrefix, .entries = {}};
  auto back = BuffersFromBody(BuffersToBody(buffers));
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, buffers);
  nlohmann::json body = BuffersToBody(buffers);
  body["buffers"][0]["section"] = "other";
  EXPECT_FALSE(BuffersFromBody(body).ok());
}

TEST(AddressTest, SplitHostPort) {
  auto hp = SplitHostPort("127.0.0.1:8080");
  ASSERT_TRUE(hp.ok());
  EXPECT_EQ(hp->first, "127.0.0.1");
  EXPECT_EQ(hp->second, 8080);
  EXPECT_FALSE(SplitHostPort("localhost").ok());
  EXPECT_FALSE(SplitHostPort("h:99999").ok());
  EXPECT_FALSE(SplitHostPort("h:abc").ok());
}

TEST(SocketTest, LoopbackExchange) {
  auto listener = Listener::Bind("127.0.0.1:0");
  ASSERT_TRUE(listener.ok()) << listener.status();
  ASSERT_GT(listener->port(), 0);
  const std::string address = "127.0.0.1:" + std::to_string(listener->port());
  WireMessage hello;
  hello.type = MessageType::kHello;
  hello.body = {{"org", "x"}};
  std::thread client([&] {
    auto sock = Socket::Connect(address, milliseconds(2000));
    ASSERT_TRUE(sock.ok());
    ASSERT_TRUE(sock->Send(hello).ok());
    auto reply = sock->Receive(Clock::now() + milliseconds(2000));
    ASSERT_TRUE(reply.ok());
    EXPECT_EQ(reply->type, MessageType::kError);
  });
  auto conn = listener->Accept(Clock::now() + milliseconds(2000));
  ASSERT_TRUE(conn.ok());
  std::vector<uint8_t> raw;
  auto got = conn->Receive(Clock::now() + milliseconds(2000), &raw);
  ASSERT_TRUE(got.ok());
  EXPECT_EQ(got->body["org"], "x");
  EXPECT_EQ(raw, EncodeFrame(hello));
  ASSERT_TRUE(conn->Send(ErrorMessage(0, "unexpected", "test")).ok());
  client.join();
  // Nothing else arrives: the receive times out, and the peer has closed.
  auto none = conn->Receive(Clock::now() + milliseconds(200));
  EXPECT_FALSE(none.ok());
  EXPECT_TRUE(conn->PeerClosed());
}

TEST(SocketTest, AcceptTimeoutAndRefusedConnect) {
  auto listener = Listener::Bind("127.0.0.1:0");
  ASSERT_TRUE(listener.ok());
  EXPECT_TRUE(absl::IsNotFound(
      listener->Accept(Clock::now() + milliseconds(50)).status()));
  const int port = listener->port();
  *listener = Listener();
  auto sock = Socket::Connect("127.0.0.1:" + std::to_string(port), milliseconds(500));
  EXPECT_FALSE(sock.ok());
  EXPECT_FALSE(Listener::Bind("not-an-ip:0").ok());
}

TEST(SocketTest, OversizedFrameRejected) {
  auto listener = Listener::Bind("127.0.0.1:0");
  ASSERT_TRUE(listener.ok());
  const std::string address = "127.0.0.1:" + std::to_string(listener->port());
  std::thread client([&] {
    auto sock = Socket::Connect(address, milliseconds(2000));
    ASSERT_TRUE(sock.ok());
    std::vector<uint8_t> header = {0xff, 0xff, 0xff, 0xff};
    ASSERT_TRUE(sock->SendAll(header).ok());
    std::this_thread::sleep_for(milliseconds(100));
  });
  auto conn = listener->Accept(Clock::now() + milliseconds(2000));
  ASSERT_TRUE(conn.ok());
  auto got = conn->Receive(Clock::now() + milliseconds(2000));
  EXPECT_FALSE(got.ok());
  client.join();
}

}  // namespace
}  // namespace cpb
