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

#include "cpb/privacy.h"

#include <algorithm>
#include <cstring>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "glog/logging.h"

namespace cpb {
namespace {

struct PlainRecord {
  EncodedElement d;
  uint32_t cnt;
  EncodedElement payload;
};

EncodedElement RawEncode(Prefix24 p, uint16_t day) {
  uint32_t v = p.value();
  return {static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 8),
          static_cast<uint8_t>(v), static_cast<uint8_t>(day >> 8),
          static_cast<uint8_t>(day)};
}

// Fisher-Yates driven by the CSPRNG. The modulo bias is below 2^-32 for any
// section that fits uint32 indices.
absl::StatusOr<std::vector<uint32_t>> RandomPermutation(size_t n) {
  std::vector<uint32_t> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = static_cast<uint32_t>(i);
  if (n < 2) return perm;
  std::vector<uint64_t> draws(n);
  absl::Status s = RandomBytes(std::span<uint8_t>(
      reinterpret_cast<uint8_t*>(draws.data()), draws.size() * sizeof(uint64_t)));
  if (!s.ok()) return s;
  for (size_t i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[draws[i] % (i + 1)]);
  }
  return perm;
}

absl::Status EncryptSection(const std::vector<PlainRecord>& records,
                            const Aes128Prp& prp, const ElementKeyDeriver& kdf,
                            const Aead& aead, bool shuffle, UploadSection* out,
                            absl::flat_hash_map<Block, KeyEntry>* keys) {
  const size_t n = records.size();
  std::vector<Block> inputs(n);
  for (size_t r = 0; r < n; ++r) inputs[r] = PrpInput(records[r].d, records[r].cnt);
  std::vector<Block> s(n);
  if (absl::Status st = prp.ApplyMany(inputs, s); !st.ok()) return st;
  std::vector<uint8_t> nonces(n * kNonceBytes);
  if (absl::Status st = RandomBytes(nonces); !st.ok()) return st;

  std::vector<uint32_t> order(n);
  if (shuffle) {
    auto perm = RandomPermutation(n);
    if (!perm.ok()) return perm.status();
    order = *std::move(perm);
  } else {
    for (size_t i = 0; i < n; ++i) order[i] = static_cast<uint32_t>(i);
  }

  out->s.resize(n);
  out->e.resize(n);
  keys->reserve(keys->size() + n);
  for (size_t pos = 0; pos < n; ++pos) {
    const uint32_t r = order[pos];
    auto key = kdf.Derive(KeyMessage(records[r].d, records[r].cnt));
    if (!key.ok()) return key.status();
    absl::Status st = aead.Seal(
        *key, std::span<const uint8_t>(nonces).subspan(pos * kNonceBytes, kNonceBytes),
        records[r].payload, out->e[pos]);
    if (!st.ok()) return st;
    out->s[pos] = s[r];
    if (!keys->emplace(s[r], KeyEntry{*key, records[r].d}).second) {
      return absl::InternalError("PRP collision inside one upload");
    }
  }
  return absl::OkStatus();
}

void AppendPool(std::string* out, const SharedPool& pool) {
  absl::StrAppend(out, pool.org, ":");
  for (const PoolEntry& e : pool.entries) {
    absl::StrAppend(out, " ", e.source, "/", e.prefix.ToString(), "/", e.day,
                    "x", e.count);
  }
  absl::StrAppend(out, "\n");
}

}  // namespace

absl::StatusOr<EncodedElement> EncodeElement(const Element& e) {
  if (e.day < 0 || e.day >= kAbsentDay) {
    return absl::OutOfRangeError(
        absl::StrCat("day index ", e.day, " does not fit the element encoding"));
  }
  return RawEncode(e.prefix, static_cast<uint16_t>(e.day));
}

Element DecodeElement(const EncodedElement& d) {
  uint32_t v = (uint32_t{d[0]} << 16) | (uint32_t{d[1]} << 8) | d[2];
  return {Prefix24::FromValue(v), static_cast<Day>((d[3] << 8) | d[4])};
}

Block PrpInput(const EncodedElement& d, uint32_t cnt) {
  Block b{};
  std::memcpy(b.data(), d.data(), d.size());
  b[5] = static_cast<uint8_t>(cnt >> 24);
  b[6] = static_cast<uint8_t>(cnt >> 16);
  b[7] = static_cast<uint8_t>(cnt >> 8);
  b[8] = static_cast<uint8_t>(cnt);
  return b;
}

std::array<uint8_t, kEncodedElementBytes + 4> KeyMessage(const EncodedElement& d,
                                                         uint32_t cnt) {
  std::array<uint8_t, kEncodedElementBytes + 4> m;
  Block b = PrpInput(d, cnt);
  std::memcpy(m.data(), b.data(), m.size());
  return m;
}

uint64_t Upload::PayloadBytes() const {
  return (elements.size() + prefixes.size()) * (kBlockBytes + kCiphertextBytes);
}

absl::StatusOr<EncryptedDataset> EncryptDataset(const OrgDataset& d,
                                                const SharedKey& key,
                                                const EncryptOptions& options) {
  if (d.multiset_size() > std::numeric_limits<uint32_t>::max()) {
    return absl::OutOfRangeError(
        absl::StrCat("dataset of ", d.org(), " exceeds 2^32-1 records"));
  }
  if (options.share_days.size() >= kAbsentDay) {
    return absl::OutOfRangeError("too many share-day slots");
  }
  auto prp = Aes128Prp::Create(key);
  if (!prp.ok()) return prp.status();
  auto kdf = ElementKeyDeriver::Create(key);
  if (!kdf.ok()) return kdf.status();
  auto aead = Aead::Create();
  if (!aead.ok()) return aead.status();

  std::vector<PlainRecord> records;
  records.reserve(d.multiset_size());
  for (const ElementCount& ec : d.entries()) {
    auto enc = EncodeElement(ec.element);
    if (!enc.ok()) return enc.status();
    for (uint32_t cnt = 1; cnt <= ec.count; ++cnt) {
      records.push_back({*enc, cnt, *enc});
      if (cnt == std::numeric_limits<uint32_t>::max()) break;
    }
  }

  EncryptedDataset out;
  out.upload.org = d.org();
  absl::Status st = EncryptSection(records, *prp, *kdf, *aead, options.shuffle,
                                   &out.upload.elements, &out.secrets.elements);
  if (!st.ok()) return st;

  if (!options.share_days.empty()) {
    records.clear();
    for (Prefix24 p : d.prefixes()) {
      for (size_t slot = 0; slot < options.share_days.size(); ++slot) {
        Element seen{p, options.share_days[slot]};
        EncodedElement payload = RawEncode(p, kAbsentDay);
        if (d.count(seen) > 0) {
          auto enc = EncodeElement(seen);
          if (!enc.ok()) return enc.status();
          payload = *enc;
        }
        // Counter 0 never occurs in the element section.
        records.push_back({RawEncode(p, static_cast<uint16_t>(slot)), 0, payload});
      }
    }
    st = EncryptSection(records, *prp, *kdf, *aead, options.shuffle,
                        &out.upload.prefixes, &out.secrets.prefixes);
    if (!st.ok()) return st;
  }
  return out;
}

absl::StatusOr<StaComputation> StaComputation::Run(std::vector<Upload> uploads) {
  const size_t n = uploads.size();
  StaComputation sta;
  for (const Upload& u : uploads) sta.orgs_.push_back(u.org);
  {
    std::vector<std::string> sorted = sta.orgs_;
    std::sort(sorted.begin(), sorted.end());
    auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end()) {
      return absl::AlreadyExistsError(absl::StrCat("duplicate upload from ", *dup));
    }
  }
  for (const Upload& u : uploads) {
    if (u.elements.s.size() != u.elements.e.size() ||
        u.prefixes.s.size() != u.prefixes.e.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("misaligned S/E in upload from ", u.org));
    }
  }

  sta.o2o_ = SimilarityMatrix(n);
  for (size_t i = 0; i < n; ++i) sta.o2o_.set(i, i, uploads[i].elements.size());

  struct Occurrence {
    Block value;
    uint32_t org;
    uint32_t index;
  };
  for (int sec = 0; sec < 2; ++sec) {
    auto& matches = sta.matches_[sec];
    matches.assign(n * n, {});
    std::vector<Occurrence> occ;
    size_t total = 0;
    for (const Upload& u : uploads) {
      total += (sec == 0 ? u.elements : u.prefixes).size();
    }
    occ.reserve(total);
    for (uint32_t org = 0; org < n; ++org) {
      const UploadSection& section =
          sec == 0 ? uploads[org].elements : uploads[org].prefixes;
      for (uint32_t idx = 0; idx < section.size(); ++idx) {
        occ.push_back({section.s[idx], org, idx});
      }
    }
    std::sort(occ.begin(), occ.end(), [](const Occurrence& a, const Occurrence& b) {
      if (a.value != b.value) return a.value < b.value;
      return a.org < b.org;
    });
    for (size_t a = 0; a < occ.size();) {
      size_t b = a + 1;
      while (b < occ.size() && occ[b].value == occ[a].value) ++b;
      for (size_t x = a; x < b; ++x) {
        if (x + 1 < b && occ[x + 1].org == occ[x].org) {
          return absl::InvalidArgumentError(absl::StrCat(
              "repeated PRP value in upload from ", uploads[occ[x].org].org));
        }
        for (size_t y = a; y < b; ++y) {
          if (x == y) continue;
          matches[occ[x].org * n + occ[y].org].push_back(occ[y].index);
          if (sec == 0) sta.o2o_.add(occ[x].org, occ[y].org, 1);
        }
      }
      a = b;
    }
  }
  sta.uploads_ = std::move(uploads);
  return sta;
}

uint64_t StaComputation::PrefixMatches(OrgIndex i, OrgIndex j) const {
  return matches_[1][i * size() + j].size();
}

std::vector<PairBuffer> StaComputation::BuffersFor(
    OrgIndex receiver, std::span<const OrgIndex> peers) const {
  const size_t n = size();
  std::vector<PairBuffer> out;
  for (OrgIndex j : peers) {
    if (j == receiver || j >= n) continue;
    for (int sec = 0; sec < 2; ++sec) {
      const UploadSection& section =
          sec == 0 ? uploads_[j].elements : uploads_[j].prefixes;
      PairBuffer buf;
      buf.receiver = receiver;
      buf.source = j;
      buf.section = sec == 0 ? Section::kElement : Section::kPrefix;
      for (uint32_t idx : matches_[sec][receiver * n + j]) {
        buf.entries.push_back({section.s[idx], section.e[idx]});
      }
      out.push_back(std::move(buf));
    }
  }
  return out;
}

absl::StatusOr<DecryptResult> DecryptShared(OrgIndex receiver,
                                            std::span<const PairBuffer> buffers,
                                            const OrgSecrets& secrets) {
  auto aead = Aead::Create();
  if (!aead.ok()) return aead.status();
  DecryptResult result;
  result.element_pool.org = receiver;
  result.prefix_pool.org = receiver;
  for (const PairBuffer& buf : buffers) {
    if (buf.receiver != receiver) {
      result.rejected += buf.entries.size();
      LOG(WARNING) << "buffer for org " << buf.receiver << " delivered to "
                   << receiver;
      continue;
    }
    const bool element = buf.section == Section::kElement;
    const auto& keys = element ? secrets.elements : secrets.prefixes;
    SharedPool& pool = element ? result.element_pool : result.prefix_pool;
    uint64_t rejected = 0;
    for (const BufferEntry& entry : buf.entries) {
      auto it = keys.find(entry.prp);
      if (it == keys.end()) {
        ++rejected;
        continue;
      }
      EncodedElement plain;
      auto ok = aead->Open(it->second.key, entry.ciphertext, plain);
      if (!ok.ok()) return ok.status();
      const bool same_prefix =
          std::equal(plain.begin(), plain.begin() + 3, it->second.expected.begin());
      if (!*ok || !same_prefix || (element && plain != it->second.expected)) {
        ++rejected;
        continue;
      }
      Element e = DecodeElement(plain);
      if (!element && e.day == kAbsentDay) continue;
      pool.entries.push_back({e.prefix, e.day, buf.source, 1});
    }
    if (rejected > 0) {
      LOG(WARNING) << "org " << receiver << ": rejected " << rejected
                   << " entries from org " << buf.source;
      result.rejected += rejected;
    }
  }
  result.element_pool.Normalize();
  result.prefix_pool.Normalize();
  return result;
}

absl::StatusOr<std::vector<SharedKey>> SetupKeys(size_t num_orgs) {
  if (num_orgs < 2) {
    return absl::InvalidArgumentError("key setup needs at least 2 orgs");
  }
  auto key = GenerateSharedKey();
  if (!key.ok()) return key.status();
  return std::vector<SharedKey>(num_orgs, *key);
}

std::string RoundOutput::Canonical() const {
  std::string out;
  absl::StrAppend(&out, "orgs ", absl::StrJoin(orgs, ","), "\n");
  for (size_t i = 0; i < o2o.size(); ++i) {
    absl::StrAppend(&out, "o2o ", absl::StrJoin(o2o.row(i), ","), "\n");
  }
  absl::StrAppend(&out, "mode ",
                  assignment.mode == ClusterAssignment::Mode::kPartition
                      ? "partition"
                      : "neighborhood",
                  "\nlabel ", absl::StrJoin(assignment.label, ","), "\n");
  for (const auto& c : assignment.clusters) {
    absl::StrAppend(&out, "cluster ", absl::StrJoin(c, ","), "\n");
  }
  for (size_t i = 0; i < assignment.raw_neighbors.size(); ++i) {
    absl::StrAppend(&out, "raw_nn ", absl::StrJoin(assignment.raw_neighbors[i], ","),
                    "\n");
  }
  for (size_t i = 0; i < assignment.neighbors.size(); ++i) {
    absl::StrAppend(&out, "nn ", absl::StrJoin(assignment.neighbors[i], ","), "\n");
  }
  absl::StrAppend(&out, "outlier ");
  for (bool b : assignment.outlier) absl::StrAppend(&out, b ? "1" : "0");
  absl::StrAppend(&out, "\n");
  for (const SharedPool& p : element_pools) {
    absl::StrAppend(&out, "element_pool ");
    AppendPool(&out, p);
  }
  for (const SharedPool& p : prefix_pools) {
    absl::StrAppend(&out, "prefix_pool ");
    AppendPool(&out, p);
  }
  absl::StrAppend(&out, "rejected ", rejected, "\n");
  return out;
}

absl::StatusOr<RoundOutput> SimulateRound(std::span<const OrgDataset> datasets,
                                          const SharedKey& key,
                                          const ClusteringSpec& clustering,
                                          std::span<const Day> share_days) {
  for (size_t i = 1; i < datasets.size(); ++i) {
    if (!(datasets[i - 1].org() < datasets[i].org())) {
      return absl::InvalidArgumentError(
          "round datasets must be sorted by distinct org name");
    }
  }
  EncryptOptions options;
  options.share_days.assign(share_days.begin(), share_days.end());
  std::vector<OrgSecrets> secrets;
  std::vector<Upload> uploads;
  for (const OrgDataset& d : datasets) {
    auto enc = EncryptDataset(d, key, options);
    if (!enc.ok()) return enc.status();
    uploads.push_back(std::move(enc->upload));
    secrets.push_back(std::move(enc->secrets));
  }
  auto sta = StaComputation::Run(std::move(uploads));
  if (!sta.ok()) return sta.status();
  auto assignment = Cluster(sta->o2o(), clustering);
  if (!assignment.ok()) return assignment.status();

  RoundOutput out;
  out.orgs = sta->orgs();
  out.o2o = sta->o2o();
  out.assignment = *std::move(assignment);
  for (OrgIndex i = 0; i < datasets.size(); ++i) {
    std::vector<OrgIndex> peers = out.assignment.Peers(i);
    auto dec = DecryptShared(i, sta->BuffersFor(i, peers), secrets[i]);
    if (!dec.ok()) return dec.status();
    out.element_pools.push_back(std::move(dec->element_pool));
    out.prefix_pools.push_back(std::move(dec->prefix_pool));
    out.rejected += dec->rejected;
  }
  return out;
}

}  // namespace cpb
