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

#include <sstream>

#include "gtest/gtest.h"

namespace cpb {
namespace {

TEST(BenchTest, UploadBytesIndependentOfOrgCount) {
  auto small = BenchProtocol({.num_orgs = 3, .set_size = 500});
  auto large = BenchProtocol({.num_orgs = 12, .set_size = 500});
  ASSERT_TRUE(small.ok() && large.ok());
  for (uint64_t b : large->upload_bytes) EXPECT_EQ(b, small->upload_bytes[0]);
  EXPECT_EQ(large->encrypt_ms.size(), 12u);
}

TEST(BenchTest, UploadBytesLinearInSetSize) {
  auto a = BenchProtocol({.num_orgs = 2, .set_size = 1000});
  auto b = BenchProtocol({.num_orgs = 2, .set_size = 2000});
  ASSERT_TRUE(a.ok() && b.ok());
  double ratio = static_cast<double>(b->upload_bytes[0]) / a->upload_bytes[0];
  EXPECT_NEAR(ratio, 2.0, 0.02);
}

TEST(BenchTest, StaBytesLinearInOrgs) {
  auto a = BenchProtocol({.num_orgs = 4, .set_size = 300});
  auto b = BenchProtocol({.num_orgs = 8, .set_size = 300});
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(b->sta_bytes_received, 2 * a->sta_bytes_received);
  std::ostringstream out;
  std::vector<BenchReport> reports = {*a, *b};
  WriteBenchCsv(reports, out);
  const std::string csv = out.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

}  // namespace
}  // namespace cpb
