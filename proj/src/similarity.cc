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

#include "cpb/similarity.h"

#include <algorithm>

namespace cpb {

uint64_t MultisetIntersectionSize(const OrgDataset& a, const OrgDataset& b) {
  auto x = a.entries();
  auto y = b.entries();
  uint64_t total = 0;
  size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i].element < y[j].element) {
      ++i;
    } else if (y[j].element < x[i].element) {
      ++j;
    } else {
      total += std::min(x[i].count, y[j].count);
      ++i;
      ++j;
    }
  }
  return total;
}

SimilarityMatrix O2oPlain(std::span<const OrgDataset> datasets) {
  const size_t n = datasets.size();
  SimilarityMatrix m(n);
  for (size_t i = 0; i < n; ++i) {
    m.set(i, i, datasets[i].multiset_size());
    for (size_t j = i + 1; j < n; ++j) {
      uint64_t v = MultisetIntersectionSize(datasets[i], datasets[j]);
      m.set(i, j, v);
      m.set(j, i, v);
    }
  }
  return m;
}

}  // namespace cpb
