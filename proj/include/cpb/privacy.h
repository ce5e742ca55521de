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

#ifndef CPB_PRIVACY_H_
#define CPB_PRIVACY_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/container/flat_hash_map.h"
#include "absl/status/statusor.h"
#include "cpb/clustering.h"
#include "cpb/crypto.h"
#include "cpb/sharing.h"
#include "cpb/similarity.h"
#include "cpb/types.h"

namespace cpb {

inline constexpr size_t kEncodedElementBytes = 5;
inline constexpr size_t kCiphertextBytes =
    kNonceBytes + kEncodedElementBytes + kTagBytes;
// Day value marking "prefix not seen on this slot" in prefix-section bodies.
inline constexpr uint16_t kAbsentDay = 0xFFFF;

using EncodedElement = std::array<uint8_t, kEncodedElementBytes>;
using Ciphertext = std::array<uint8_t, kCiphertextBytes>;

// 3-byte prefix || 2-byte day, big-endian. The day must fit below kAbsentDay.
absl::StatusOr<EncodedElement> EncodeElement(const Element& e);
Element DecodeElement(const EncodedElement& d);
// d || 4-byte big-endian counter || zero padding.
Block PrpInput(const EncodedElement& d, uint32_t cnt);
// d || 4-byte big-endian counter, the element-key derivation message.
std::array<uint8_t, kEncodedElementBytes + 4> KeyMessage(const EncodedElement& d,
                                                         uint32_t cnt);

// Element-level records (one per element copy) drive O2O and the matched
// buffers. Prefix records (one per distinct prefix and train-day slot, counter
// 0) let peers who share a prefix exchange the days they saw it.
enum class Section { kElement, kPrefix };

// STA-visible part of one section: index-aligned PRP values and ciphertexts.
struct UploadSection {
  std::vector<Block> s;
  std::vector<Ciphertext> e;

  size_t size() const { return s.size(); }
  friend bool operator==(const UploadSection&, const UploadSection&) = default;
};

struct Upload {
  std::string org;
  UploadSection elements;
  UploadSection prefixes;

  // Payload bytes of both sections, without framing.
  uint64_t PayloadBytes() const;
  friend bool operator==(const Upload&, const Upload&) = default;
};

struct KeyEntry {
  ElementKey key;
  // Plaintext expected behind the ciphertext. Prefix-section entries only
  // check the prefix bytes.
  EncodedElement expected;
};

// Held by the organization, never uploaded.
struct OrgSecrets {
  absl::flat_hash_map<Block, KeyEntry> elements;
  absl::flat_hash_map<Block, KeyEntry> prefixes;
};

struct EncryptedDataset {
  Upload upload;
  OrgSecrets secrets;
};

struct EncryptOptions {
  // Train days backing the prefix section, one slot each. Empty disables it.
  std::vector<Day> share_days;
  bool shuffle = true;
};

absl::StatusOr<EncryptedDataset> EncryptDataset(const OrgDataset& d,
                                                const SharedKey& key,
                                                const EncryptOptions& options = {});

struct BufferEntry {
  Block prp;
  Ciphertext ciphertext;

  friend bool operator==(const BufferEntry&, const BufferEntry&) = default;
};

struct PairBuffer {
  OrgIndex receiver = 0;
  OrgIndex source = 0;
  Section section = Section::kElement;
  // Sorted by PRP value.
  std::vector<BufferEntry> entries;

  friend bool operator==(const PairBuffer&, const PairBuffer&) = default;
};

// Matching done by the STA over uploads it cannot read. Org indices follow
// upload order.
class StaComputation {
 public:
  static absl::StatusOr<StaComputation> Run(std::vector<Upload> uploads);

  size_t size() const { return uploads_.size(); }
  const std::vector<std::string>& orgs() const { return orgs_; }
  // O2O[i][j] = |S_i ∩ S_j| over element sections; the diagonal is |S_i|.
  const SimilarityMatrix& o2o() const { return o2o_; }
  // Number of prefix-section matches between i and j.
  uint64_t PrefixMatches(OrgIndex i, OrgIndex j) const;

  // Element and prefix buffers from every peer, peers in the given order.
  std::vector<PairBuffer> BuffersFor(OrgIndex receiver,
                                     std::span<const OrgIndex> peers) const;

 private:
  StaComputation() = default;

  std::vector<Upload> uploads_;
  std::vector<std::string> orgs_;
  SimilarityMatrix o2o_;
  // [section][i * n + j]: indices into j's section matched by i, PRP order.
  std::array<std::vector<std::vector<uint32_t>>, 2> matches_;
};

struct DecryptResult {
  SharedPool element_pool;
  SharedPool prefix_pool;
  // Entries dropped for unknown PRP values, failed authentication or a
  // plaintext that disagrees with the receiver's own element.
  uint64_t rejected = 0;
};

// Buffers addressed to another receiver are rejected wholesale.
absl::StatusOr<DecryptResult> DecryptShared(OrgIndex receiver,
                                            std::span<const PairBuffer> buffers,
                                            const OrgSecrets& secrets);

// Materializes the shared key once per org for simulation runs.
absl::StatusOr<std::vector<SharedKey>> SetupKeys(size_t num_orgs);

struct RoundOutput {
  std::vector<std::string> orgs;
  SimilarityMatrix o2o;
  ClusterAssignment assignment;
  std::vector<SharedPool> element_pools;
  std::vector<SharedPool> prefix_pools;
  uint64_t rejected = 0;

  // Stable text form used for byte-wise cross-mode comparison.
  std::string Canonical() const;
  friend bool operator==(const RoundOutput&, const RoundOutput&) = default;
};

// One full protocol round in process. `datasets` must be sorted by org name
// with distinct names.
absl::StatusOr<RoundOutput> SimulateRound(std::span<const OrgDataset> datasets,
                                          const SharedKey& key,
                                          const ClusteringSpec& clustering,
                                          std::span<const Day> share_days);

}  // namespace cpb

#endif  // CPB_PRIVACY_H_
