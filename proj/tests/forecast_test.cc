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

#include "cpb/forecast.h"

#include <cmath>
#include <random>

#include "gtest/gtest.h"

namespace cpb {
namespace {

// Direct weighted sum, oldest day first: sum_t alpha (1-alpha)^(T-1-t) r(t).
double DirectEwma(const std::vector<double>& r, double alpha) {
  const int t = static_cast<int>(r.size());
  double s = 0;
  for (int i = 0; i < t; ++i) s += alpha * std::pow(1 - alpha, t - 1 - i) * r[i];
  return s;
}

TEST(EwmaTest, FrozenValues) {
  // Independently computed.
  EXPECT_NEAR(*EwmaScore(std::vector<double>{1, 0, 1, 1, 0}, 0.9),
              0.09908999999999998, 1e-15);
  EXPECT_NEAR(*EwmaScore(std::vector<double>{3, 0, 2, 7, 1}, 0.3), 2.28009,
              1e-12);
  EXPECT_NEAR(*EwmaScore(std::vector<double>{0, 0, 0, 0, 1}, 0.9), 0.9, 1e-15);
}

TEST(EwmaTest, MatchesDirectSum) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> val(0, 20), a(0.01, 0.99);
  std::uniform_int_distribution<int> len(1, 30);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> r(len(rng));
    for (double& v : r) v = val(rng);
    double alpha = a(rng);
    EXPECT_NEAR(*EwmaScore(r, alpha), DirectEwma(r, alpha), 1e-12);
  }
}

TEST(EwmaTest, Recency) {
  // A hit on a later day always outweighs the same hit earlier.
  for (double alpha : {0.1, 0.5, 0.9}) {
    for (int t = 2; t <= 8; ++t) {
      for (int i = 0; i + 1 < t; ++i) {
        std::vector<double> early(t, 0), late(t, 0);
        early[i] = 1;
        late[i + 1] = 1;
        EXPECT_GT(*EwmaScore(late, alpha), *EwmaScore(early, alpha));
      }
    }
  }
}

TEST(EwmaTest, Linearity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> val(-5, 5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(5), y(5), sum(5);
    double c = val(rng);
    for (int i = 0; i < 5; ++i) {
      x[i] = val(rng);
      y[i] = val(rng);
      sum[i] = c * x[i] + y[i];
    }
    EXPECT_NEAR(*EwmaScore(sum, 0.9),
                c * *EwmaScore(x, 0.9) + *EwmaScore(y, 0.9), 1e-12);
  }
}

TEST(EwmaTest, Errors) {
  std::vector<double> r = {1};
  EXPECT_FALSE(EwmaScore(r, 0).ok());
  EXPECT_FALSE(EwmaScore(r, 1).ok());
  EXPECT_FALSE(EwmaScore(r, std::nan("")).ok());
  EXPECT_FALSE(EwmaScore(std::vector<double>{}, 0.5).ok());
}

Prefix24 P(uint32_t v) { return Prefix24::FromValue(v); }

TEST(PredictTest, PresenceMergesLocalAndShared) {
  const std::vector<Day> days = {10, 11, 12, 13, 14};
  OrgDataset local = OrgDataset::FromElements(
      "me", {{{P(1), 14}, 3}, {{P(2), 10}, 1}, {{P(3), 9}, 1}});
  OrgDataset shared = OrgDataset::FromElements(
      "", {{{P(1), 14}, 5}, {{P(2), 14}, 1}, {{P(4), 13}, 2}});
  auto pred = Predict(local, shared, days);
  ASSERT_TRUE(pred.ok());
  EXPECT_EQ(pred->org, "me");
  // P(3) is outside the train days, so unknown.
  ASSERT_EQ(pred->scores.size(), 3u);
  EXPECT_EQ(pred->scores[0].prefix, P(1));
  EXPECT_NEAR(pred->scores[0].score, 0.9, 1e-15);
  EXPECT_NEAR(pred->scores[1].score, 0.9 + 0.9 * 1e-4, 1e-12);
  EXPECT_NEAR(pred->scores[2].score, 0.09, 1e-12);
  EXPECT_EQ(pred->blacklist, (std::vector<Prefix24>{P(1), P(2)}));
  EXPECT_EQ(pred->whitelist, (std::vector<Prefix24>{P(4)}));
}

TEST(PredictTest, CountModeSums) {
  const std::vector<Day> days = {0, 1};
  OrgDataset local = OrgDataset::FromElements("me", {{{P(1), 1}, 3}});
  OrgDataset shared = OrgDataset::FromElements("", {{{P(1), 1}, 2}});
  PredictOptions opt;
  opt.mode = SignalMode::kCount;
  opt.tau = 4.6;
  auto pred = Predict(local, shared, days, opt);
  ASSERT_TRUE(pred.ok());
  EXPECT_NEAR(pred->scores[0].score, 4.5, 1e-12);
  EXPECT_TRUE(pred->blacklist.empty());
}

TEST(PredictTest, ThresholdIsInclusive) {
  const std::vector<Day> days = {0};
  OrgDataset local = OrgDataset::FromElements("me", {{{P(1), 0}, 1}});
  PredictOptions opt;
  opt.tau = 0.9;
  auto pred = Predict(local, OrgDataset(), days, opt);
  ASSERT_TRUE(pred.ok());
  EXPECT_EQ(pred->blacklist.size(), 1u);
}

TEST(PredictTest, Errors) {
  OrgDataset d("x");
  EXPECT_FALSE(Predict(d, d, std::vector<Day>{}).ok());
  PredictOptions bad;
  bad.alpha = 1.5;
  EXPECT_FALSE(Predict(d, d, std::vector<Day>{1}, bad).ok());
}

}  // namespace
}  // namespace cpb
