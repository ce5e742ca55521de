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

#include "cpb/bench.h"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "cpb/privacy.h"
#include "cpb/synth.h"
#include "cpb/wire.h"

namespace cpb {
namespace {

double Millis(std::chrono::steady_clock::duration d) {
  return std::chrono::duration<double, std::milli>(d).count();
}

// Datasets of exactly `set_size` element copies, multiplicities 1..4.
std::vector<OrgDataset> BenchDatasets(const BenchOptions& o) {
  std::mt19937_64 rng(o.seed);
  std::uniform_int_distribution<uint32_t> prefix(0, 0xFFFFFF);
  std::uniform_int_distribution<int> day(0, 4);
  std::uniform_int_distribution<uint32_t> mult(1, 4);
  std::vector<Element> common(o.set_size);
  for (Element& e : common) e = {Prefix24::FromValue(prefix(rng)), kDefaultFirstDay + day(rng)};
  std::bernoulli_distribution shared(o.overlap);
  std::uniform_int_distribution<size_t> pick(0, common.size() - 1);
  std::vector<OrgDataset> out;
  for (size_t i = 0; i < o.num_orgs; ++i) {
    std::vector<ElementCount> entries;
    size_t total = 0;
    while (total < o.set_size) {
      Element e = shared(rng) ? common[pick(rng)]
                              : Element{Prefix24::FromValue(prefix(rng)),
                                        kDefaultFirstDay + day(rng)};
      uint32_t c = std::min<uint32_t>(mult(rng), static_cast<uint32_t>(o.set_size - total));
      entries.push_back({e, c});
      total += c;
    }
    out.push_back(OrgDataset::FromElements(absl::StrFormat("org%06d", i),
                                           std::move(entries)));
  }
  return out;
}

}  // namespace

absl::StatusOr<BenchReport> BenchProtocol(const BenchOptions& options) {
  if (options.num_orgs < 2 || options.set_size < 1) {
    return absl::InvalidArgumentError("bench needs >= 2 orgs and a positive set size");
  }
  auto key = GenerateSharedKey();
  if (!key.ok()) return key.status();
  std::vector<OrgDataset> datasets = BenchDatasets(options);

  BenchReport report;
  report.num_orgs = options.num_orgs;
  report.set_size = options.set_size;
  std::vector<Upload> uploads;
  for (const OrgDataset& d : datasets) {
    auto start = std::chrono::steady_clock::now();
    auto enc = EncryptDataset(d, *key);
    if (!enc.ok()) return enc.status();
    report.encrypt_ms.push_back(Millis(std::chrono::steady_clock::now() - start));
    WireMessage m;
    m.type = MessageType::kUpload;
    m.body = UploadToBody(enc->upload);
    report.upload_bytes.push_back(EncodeFrame(m).size());
    report.sta_bytes_received += report.upload_bytes.back();
    uploads.push_back(std::move(enc->upload));
  }
  std::vector<double> sorted = report.encrypt_ms;
  std::sort(sorted.begin(), sorted.end());
  report.median_encrypt_ms = sorted.size() % 2 == 1
                                 ? sorted[sorted.size() / 2]
                                 : (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]) / 2;

  auto start = std::chrono::steady_clock::now();
  auto sta = StaComputation::Run(std::move(uploads));
  if (!sta.ok()) return sta.status();
  report.sta_compute_ms = Millis(std::chrono::steady_clock::now() - start);

  std::vector<OrgIndex> everyone(options.num_orgs);
  std::iota(everyone.begin(), everyone.end(), 0);
  for (OrgIndex i = 0; i < options.num_orgs; ++i) {
    WireMessage m;
    m.type = MessageType::kBuffers;
    m.body = BuffersToBody(sta->BuffersFor(i, everyone));
    report.buffer_bytes += EncodeFrame(m).size();
  }
  return report;
}

void WriteBenchCsv(std::span<const BenchReport> reports, std::ostream& out) {
  out << "n,set_size,median_encrypt_ms,min_upload_bytes,max_upload_bytes,"
         "sta_compute_ms,sta_bytes_received,buffer_bytes\n";
  for (const BenchReport& r : reports) {
    auto [lo, hi] = std::minmax_element(r.upload_bytes.begin(), r.upload_bytes.end());
    out << r.num_orgs << "," << r.set_size << ","
        << absl::StrFormat("%.3f", r.median_encrypt_ms) << "," << *lo << "," << *hi
        << "," << absl::StrFormat("%.3f", r.sta_compute_ms) << ","
        << r.sta_bytes_received << "," << r.buffer_bytes << "\n";
  }
}

}  // namespace cpb
