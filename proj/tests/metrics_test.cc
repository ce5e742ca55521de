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

#include "cpb/metrics.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "gtest/gtest.h"

namespace cpb {
namespace {

Prefix24 P(uint32_t v) { return Prefix24::FromValue(v); }

TEST(ConfuseTest, Counts) {
  PredictionList pred;
  pred.blacklist = {P(1), P(2), P(3)};
  pred.whitelist = {P(4), P(5)};
  std::vector<Prefix24> test = {P(1), P(4), P(9), P(10)};
  Confusion c = Confuse(pred, test);
  EXPECT_EQ(c.tp, 1u);
  EXPECT_EQ(c.fp, 2u);
  EXPECT_EQ(c.fn, 1u);
  EXPECT_EQ(c.tn, 1u);
  EXPECT_EQ(c.unreachable, 2u);
  EXPECT_EQ(c.tp + c.fp, pred.blacklist.size());
}

TEST(DeriveTest, Rates) {
  Confusion c{.tp = 3, .fp = 1, .fn = 2, .tn = 4};
  QualityReport r = Derive(c, c);
  EXPECT_DOUBLE_EQ(*r.tpr, 0.6);
  EXPECT_DOUBLE_EQ(*r.ppv, 0.75);
  EXPECT_DOUBLE_EQ(*r.fpr, 0.2);
  EXPECT_EQ(*r.tp_impr, 0.0);
  EXPECT_EQ(*r.fp_incr, 0.0);
  EXPECT_EQ(*r.fn_incr, 0.0);
}

TEST(DeriveTest, PropertiesOnRandomCounts) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> v(0, 50);
  for (int trial = 0; trial < 2000; ++trial) {
    Confusion c{.tp = static_cast<uint64_t>(v(rng)),
                .fp = static_cast<uint64_t>(v(rng)),
                .fn = static_cast<uint64_t>(v(rng)),
                .tn = static_cast<uint64_t>(v(rng))};
    QualityReport self = Derive(c, c);
    if (c.tp > 0) EXPECT_EQ(*self.tp_impr, 0.0);
    if (c.fp > 0) EXPECT_EQ(*self.fp_incr, 0.0);
    if (c.fn > 0) EXPECT_EQ(*self.fn_incr, 0.0);
    if (self.ppv && self.tpr && *self.ppv + *self.tpr > 0) {
      double hm = 2 * *self.ppv * *self.tpr / (*self.ppv + *self.tpr);
      EXPECT_NEAR(*self.f1, hm, 1e-12);
    }
    Confusion b{.tp = static_cast<uint64_t>(v(rng)),
                .fp = static_cast<uint64_t>(v(rng)),
                .fn = static_cast<uint64_t>(v(rng))};
    QualityReport r = Derive(c, b);
    if (b.tp == 0) {
      EXPECT_FALSE(r.tp_impr.has_value());
    } else {
      EXPECT_NEAR(*r.tp_impr,
                  (double(c.tp) - double(b.tp)) / double(b.tp), 1e-15);
    }
  }
}

TEST(DeriveTest, UndefinedRates) {
  QualityReport r = Derive(Confusion{}, Confusion{});
  EXPECT_FALSE(r.tpr.has_value());
  EXPECT_FALSE(r.ppv.has_value());
  EXPECT_FALSE(r.f1.has_value());
  EXPECT_FALSE(r.tp_impr.has_value());
}

TEST(SummarizeTest, PopulationStdAndExclusions) {
  std::vector<std::optional<double>> v = {2, std::nullopt, 4, 4, 4, 5, 5, 7, 9};
  MetricSummary s = Summarize(v);
  EXPECT_EQ(s.count, 8u);
  EXPECT_EQ(s.excluded, 1u);
  EXPECT_DOUBLE_EQ(*s.mean, 5.0);
  EXPECT_DOUBLE_EQ(*s.stddev, 2.0);
  EXPECT_FALSE(Summarize(std::vector<std::optional<double>>{std::nullopt}).mean);
}

TEST(SummarizeTest, OrderIndependent) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1e3, 1e3);
  std::vector<std::optional<double>> v(101);
  for (auto& x : v) x = d(rng);
  MetricSummary a = Summarize(v);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(v.begin(), v.end(), rng);
    MetricSummary b = Summarize(v);
    EXPECT_EQ(*a.mean, *b.mean);
    EXPECT_EQ(*a.stddev, *b.stddev);
  }
}

TEST(AggregateTest, Columns) {
  std::vector<QualityReport> reports(2);
  reports[0].tpr = 0.5;
  reports[1].tpr = 1.0;
  reports[1].tp_impr = 0.25;
  QualitySummary s = Aggregate(reports);
  EXPECT_EQ(s.rows, 2u);
  EXPECT_DOUBLE_EQ(*s.tpr.mean, 0.75);
  EXPECT_EQ(s.tp_impr.count, 1u);
  EXPECT_EQ(s.tp_impr.excluded, 1u);
  EXPECT_FALSE(s.ppv.mean.has_value());
}

}  // namespace
}  // namespace cpb
