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

#include "cpb/crypto.h"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <algorithm>
#include <cstring>

#include "absl/strings/ascii.h"
#include "absl/strings/escaping.h"
#include "absl/strings/str_cat.h"
#include "cpb/strings.h"

namespace cpb {
namespace {

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

absl::Status OpensslError(std::string_view what) {
  return absl::InternalError(absl::StrCat("openssl: ", Sv(what), " failed"));
}

constexpr size_t kShaBlock = 64;

}  // namespace

std::string HexEncode(std::span<const uint8_t> bytes) {
  return absl::BytesToHexString(absl::string_view(
      reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

absl::StatusOr<std::vector<uint8_t>> HexDecode(std::string_view hex) {
  if (hex.size() % 2 != 0) return absl::InvalidArgumentError("odd hex length");
  for (char c : hex) {
    if (!absl::ascii_isxdigit(static_cast<unsigned char>(c))) {
      return absl::InvalidArgumentError("non-hex character");
    }
  }
  std::string raw = absl::HexStringToBytes(Sv(hex));
  return std::vector<uint8_t>(raw.begin(), raw.end());
}

std::string SharedKey::ToHex() const { return HexEncode(bytes); }

absl::StatusOr<SharedKey> SharedKey::FromHex(std::string_view hex) {
  auto raw = HexDecode(hex);
  if (!raw.ok()) return raw.status();
  if (raw->size() != kSharedKeyBytes) {
    return absl::InvalidArgumentError(
        absl::StrCat("shared key must be ", kSharedKeyBytes, " bytes"));
  }
  SharedKey key;
  std::memcpy(key.bytes.data(), raw->data(), kSharedKeyBytes);
  return key;
}

absl::Status RandomBytes(std::span<uint8_t> out) {
  if (out.empty()) return absl::OkStatus();
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    return OpensslError("RAND_bytes");
  }
  return absl::OkStatus();
}

absl::StatusOr<SharedKey> GenerateSharedKey() {
  SharedKey key;
  if (absl::Status s = RandomBytes(key.bytes); !s.ok()) return s;
  return key;
}

// ---- Aes128Prp ----

struct Aes128Prp::Impl {
  CipherCtx ctx;
};

Aes128Prp::Aes128Prp(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Aes128Prp::Aes128Prp(Aes128Prp&&) noexcept = default;
Aes128Prp& Aes128Prp::operator=(Aes128Prp&&) noexcept = default;
Aes128Prp::~Aes128Prp() = default;

absl::StatusOr<Aes128Prp> Aes128Prp::Create(const SharedKey& key) {
  auto impl = std::make_unique<Impl>();
  impl->ctx.reset(EVP_CIPHER_CTX_new());
  if (!impl->ctx ||
      EVP_EncryptInit_ex(impl->ctx.get(), EVP_aes_128_ecb(), nullptr,
                         key.bytes.data(), nullptr) != 1 ||
      EVP_CIPHER_CTX_set_padding(impl->ctx.get(), 0) != 1) {
    return OpensslError("AES-128 init");
  }
  return Aes128Prp(std::move(impl));
}

absl::Status Aes128Prp::ApplyMany(std::span<const Block> in,
                                  std::span<Block> out) const {
  if (in.size() != out.size()) {
    return absl::InvalidArgumentError("PRP input/output size mismatch");
  }
  // ECB keeps no state between blocks, so large batches are split only to
  // stay within int lengths.
  constexpr size_t kChunk = 1 << 20;
  for (size_t off = 0; off < in.size(); off += kChunk) {
    size_t count = std::min(kChunk, in.size() - off);
    int len = 0;
    if (EVP_EncryptUpdate(impl_->ctx.get(), out[off].data(), &len,
                          in[off].data(),
                          static_cast<int>(count * kBlockBytes)) != 1 ||
        static_cast<size_t>(len) != count * kBlockBytes) {
      return OpensslError("AES-128 encrypt");
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<Block> Aes128Prp::Apply(const Block& in) const {
  Block out;
  absl::Status s = ApplyMany(std::span<const Block>(&in, 1),
                             std::span<Block>(&out, 1));
  if (!s.ok()) return s;
  return out;
}

// ---- ElementKeyDeriver ----

struct ElementKeyDeriver::Impl {
  MdCtx inner;
  MdCtx outer;
  MdCtx scratch;
};

ElementKeyDeriver::ElementKeyDeriver(std::unique_ptr<Impl> impl)
    : impl_(std::move(impl)) {}
ElementKeyDeriver::ElementKeyDeriver(ElementKeyDeriver&&) noexcept = default;
ElementKeyDeriver& ElementKeyDeriver::operator=(ElementKeyDeriver&&) noexcept =
    default;
ElementKeyDeriver::~ElementKeyDeriver() = default;

absl::StatusOr<ElementKeyDeriver> ElementKeyDeriver::Create(
    const SharedKey& key) {
  auto impl = std::make_unique<Impl>();
  impl->inner.reset(EVP_MD_CTX_new());
  impl->outer.reset(EVP_MD_CTX_new());
  impl->scratch.reset(EVP_MD_CTX_new());
  if (!impl->inner || !impl->outer || !impl->scratch) {
    return OpensslError("EVP_MD_CTX_new");
  }
  uint8_t ipad[kShaBlock];
  uint8_t opad[kShaBlock];
  std::memset(ipad, 0x36, kShaBlock);
  std::memset(opad, 0x5c, kShaBlock);
  for (size_t i = 0; i < key.bytes.size(); ++i) {
    ipad[i] ^= key.bytes[i];
    opad[i] ^= key.bytes[i];
  }
  if (EVP_DigestInit_ex(impl->inner.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(impl->inner.get(), ipad, kShaBlock) != 1 ||
      EVP_DigestInit_ex(impl->outer.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(impl->outer.get(), opad, kShaBlock) != 1) {
    return OpensslError("HMAC key setup");
  }
  return ElementKeyDeriver(std::move(impl));
}

absl::StatusOr<ElementKey> ElementKeyDeriver::Derive(
    std::span<const uint8_t> message) const {
  ElementKey inner_hash;
  ElementKey out;
  unsigned int len = 0;
  EVP_MD_CTX* s = impl_->scratch.get();
  if (EVP_MD_CTX_copy_ex(s, impl_->inner.get()) != 1 ||
      EVP_DigestUpdate(s, message.data(), message.size()) != 1 ||
      EVP_DigestFinal_ex(s, inner_hash.data(), &len) != 1 ||
      EVP_MD_CTX_copy_ex(s, impl_->outer.get()) != 1 ||
      EVP_DigestUpdate(s, inner_hash.data(), inner_hash.size()) != 1 ||
      EVP_DigestFinal_ex(s, out.data(), &len) != 1) {
    return OpensslError("HMAC-SHA256");
  }
  return out;
}

// ---- Aead ----

struct Aead::Impl {
  CipherCtx enc;
  CipherCtx dec;
};

Aead::Aead(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Aead::Aead(Aead&&) noexcept = default;
Aead& Aead::operator=(Aead&&) noexcept = default;
Aead::~Aead() = default;

absl::StatusOr<Aead> Aead::Create() {
  auto impl = std::make_unique<Impl>();
  impl->enc.reset(EVP_CIPHER_CTX_new());
  impl->dec.reset(EVP_CIPHER_CTX_new());
  if (!impl->enc || !impl->dec ||
      EVP_EncryptInit_ex(impl->enc.get(), EVP_aes_256_gcm(), nullptr, nullptr,
                         nullptr) != 1 ||
      EVP_DecryptInit_ex(impl->dec.get(), EVP_aes_256_gcm(), nullptr, nullptr,
                         nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(impl->enc.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceBytes,
                          nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(impl->dec.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceBytes,
                          nullptr) != 1) {
    return OpensslError("AES-256-GCM init");
  }
  return Aead(std::move(impl));
}

absl::Status Aead::Seal(const ElementKey& key, std::span<const uint8_t> nonce,
                        std::span<const uint8_t> plaintext,
                        std::span<uint8_t> sealed) const {
  if (nonce.size() != kNonceBytes ||
      sealed.size() != kNonceBytes + plaintext.size() + kTagBytes) {
    return absl::InvalidArgumentError("bad AEAD buffer sizes");
  }
  EVP_CIPHER_CTX* c = impl_->enc.get();
  std::memcpy(sealed.data(), nonce.data(), kNonceBytes);
  int len = 0;
  int tail = 0;
  if (EVP_EncryptInit_ex(c, nullptr, nullptr, key.data(), nonce.data()) != 1 ||
      EVP_EncryptUpdate(c, sealed.data() + kNonceBytes, &len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1 ||
      EVP_EncryptFinal_ex(c, sealed.data() + kNonceBytes + len, &tail) != 1 ||
      EVP_CIPHER_CTX_ctrl(c, EVP_CTRL_GCM_GET_TAG, kTagBytes,
                          sealed.data() + kNonceBytes + plaintext.size()) != 1) {
    return OpensslError("AES-256-GCM seal");
  }
  return absl::OkStatus();
}

absl::StatusOr<bool> Aead::Open(const ElementKey& key,
                                std::span<const uint8_t> sealed,
                                std::span<uint8_t> plaintext) const {
  if (sealed.size() != kNonceBytes + plaintext.size() + kTagBytes) {
    return absl::InvalidArgumentError("bad AEAD buffer sizes");
  }
  EVP_CIPHER_CTX* c = impl_->dec.get();
  int len = 0;
  int tail = 0;
  // The tag ctrl takes a non-const pointer but only reads it.
  uint8_t tag[kTagBytes];
  std::memcpy(tag, sealed.data() + kNonceBytes + plaintext.size(), kTagBytes);
  if (EVP_DecryptInit_ex(c, nullptr, nullptr, key.data(), sealed.data()) != 1 ||
      EVP_DecryptUpdate(c, plaintext.data(), &len, sealed.data() + kNonceBytes,
                        static_cast<int>(plaintext.size())) != 1 ||
      EVP_CIPHER_CTX_ctrl(c, EVP_CTRL_GCM_SET_TAG, kTagBytes, tag) != 1) {
    return OpensslError("AES-256-GCM open");
  }
  return EVP_DecryptFinal_ex(c, plaintext.data() + len, &tail) == 1;
}

}  // namespace cpb
