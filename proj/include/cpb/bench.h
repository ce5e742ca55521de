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

#ifndef CPB_BENCH_H_
#define CPB_BENCH_H_

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "absl/status/statusor.h"

namespace cpb {

struct BenchOptions {
  size_t num_orgs = 10;
  // Multiset size of every org's dataset.
  size_t set_size = 4000;
  // Fraction of each org's elements drawn from a pool shared by all orgs.
  double overlap = 0.3;
  uint64_t seed = 1;
};

struct BenchReport {
  size_t num_orgs = 0;
  size_t set_size = 0;
  // Per org, in org order.
  std::vector<double> encrypt_ms;
  std::vector<uint64_t> upload_bytes;  // full UPLOAD frame
  double median_encrypt_ms = 0;
  double sta_compute_ms = 0;
  uint64_t sta_bytes_received = 0;
  uint64_t buffer_bytes = 0;  // all BUFFERS frames, every org in one cluster
};

absl::StatusOr<BenchReport> BenchProtocol(const BenchOptions& options);

void WriteBenchCsv(std::span<const BenchReport> reports, std::ostream& out);

}  // namespace cpb

#endif  // CPB_BENCH_H_
