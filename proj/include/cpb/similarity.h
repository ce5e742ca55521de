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

#ifndef CPB_SIMILARITY_H_
#define CPB_SIMILARITY_H_

#include <cstdint>
#include <span>
#include <vector>

#include "cpb/types.h"

namespace cpb {

// The O2O matrix: n x n multiset-intersection cardinalities. The diagonal
// holds each dataset's own multiset size.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  explicit SimilarityMatrix(size_t n) : n_(n), cells_(n * n, 0) {}

  size_t size() const { return n_; }
  uint64_t at(size_t i, size_t j) const { return cells_[i * n_ + j]; }
  void set(size_t i, size_t j, uint64_t v) { cells_[i * n_ + j] = v; }
  void add(size_t i, size_t j, uint64_t v) { cells_[i * n_ + j] += v; }
  std::span<const uint64_t> row(size_t i) const {
    return std::span<const uint64_t>(cells_).subspan(i * n_, n_);
  }

  friend bool operator==(const SimilarityMatrix&,
                         const SimilarityMatrix&) = default;

 private:
  size_t n_ = 0;
  std::vector<uint64_t> cells_;
};

// sum over elements of min(count_a, count_b).
uint64_t MultisetIntersectionSize(const OrgDataset& a, const OrgDataset& b);

// Plaintext O2O over datasets from one train window.
SimilarityMatrix O2oPlain(std::span<const OrgDataset> datasets);

}  // namespace cpb

#endif  // CPB_SIMILARITY_H_
