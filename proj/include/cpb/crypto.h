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

#ifndef CPB_CRYPTO_H_
#define CPB_CRYPTO_H_

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace cpb {

inline constexpr size_t kSharedKeyBytes = 16;
inline constexpr size_t kBlockBytes = 16;
inline constexpr size_t kElementKeyBytes = 32;
inline constexpr size_t kNonceBytes = 12;
inline constexpr size_t kTagBytes = 16;

using Block = std::array<uint8_t, kBlockBytes>;
using ElementKey = std::array<uint8_t, kElementKeyBytes>;

// The 128-bit secret every organization holds and the STA never sees.
struct SharedKey {
  std::array<uint8_t, kSharedKeyBytes> bytes{};

  std::string ToHex() const;
  static absl::StatusOr<SharedKey> FromHex(std::string_view hex);

  friend bool operator==(const SharedKey&, const SharedKey&) = default;
};

absl::StatusOr<SharedKey> GenerateSharedKey();

// Fills `out` from the OpenSSL CSPRNG.
absl::Status RandomBytes(std::span<uint8_t> out);

std::string HexEncode(std::span<const uint8_t> bytes);
absl::StatusOr<std::vector<uint8_t>> HexDecode(std::string_view hex);

// AES-128 in single-block mode, keyed once.
class Aes128Prp {
 public:
  static absl::StatusOr<Aes128Prp> Create(const SharedKey& key);

  Aes128Prp(Aes128Prp&&) noexcept;
  Aes128Prp& operator=(Aes128Prp&&) noexcept;
  ~Aes128Prp();

  absl::StatusOr<Block> Apply(const Block& in) const;
  // Permutes every block of `in` into `out` (same length).
  absl::Status ApplyMany(std::span<const Block> in, std::span<Block> out) const;

 private:
  struct Impl;
  explicit Aes128Prp(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

// HMAC-SHA256 keyed with the shared key. The padded key states are hashed
// once so each derivation costs two short digests.
class ElementKeyDeriver {
 public:
  static absl::StatusOr<ElementKeyDeriver> Create(const SharedKey& key);

  ElementKeyDeriver(ElementKeyDeriver&&) noexcept;
  ElementKeyDeriver& operator=(ElementKeyDeriver&&) noexcept;
  ~ElementKeyDeriver();

  absl::StatusOr<ElementKey> Derive(std::span<const uint8_t> message) const;

 private:
  struct Impl;
  explicit ElementKeyDeriver(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

// AES-256-GCM. Sealed layout: nonce || body || tag.
class Aead {
 public:
  static absl::StatusOr<Aead> Create();

  Aead(Aead&&) noexcept;
  Aead& operator=(Aead&&) noexcept;
  ~Aead();

  absl::Status Seal(const ElementKey& key, std::span<const uint8_t> nonce,
                    std::span<const uint8_t> plaintext,
                    std::span<uint8_t> sealed) const;
  // Returns false on authentication failure.
  absl::StatusOr<bool> Open(const ElementKey& key,
                            std::span<const uint8_t> sealed,
                            std::span<uint8_t> plaintext) const;

 private:
  struct Impl;
  explicit Aead(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace cpb

#endif  // CPB_CRYPTO_H_
