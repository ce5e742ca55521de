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

#include "cpb/types.h"

#include "gtest/gtest.h"

namespace cpb {
namespace {

TEST(Prefix24Test, ParsesAndFormats) {
  auto p = Prefix24::Parse("192.0.2.77");
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->value(), 0xC00002u);
  EXPECT_EQ(p->ToString(), "192.0.2.0");
  EXPECT_EQ(Prefix24::FromAddress(0x01020304).ToString(), "1.2.3.0");
  EXPECT_EQ(Prefix24::FromValue(0xFF010203).value(), 0x010203u);
}

TEST(Prefix24Test, AcceptsLeadingZeros) {
  auto p = Prefix24::Parse("010.001.002.003");
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->ToString(), "10.1.2.0");
}

TEST(Prefix24Test, RejectsMalformed) {
  for (const char* bad : {"", "1.2.3", "1.2.3.4.5", "256.1.1.1", "1..2.3", "a.b.c.d",
                          "1.2.3.-4", " 1.2.3.4", "1.2.3.4 "}) {
    EXPECT_FALSE(Prefix24::Parse(bad).has_value()) << bad;
  }
}

TEST(ParseIpv4Test, Value) {
  EXPECT_EQ(ParseIpv4("255.255.255.255"), 0xFFFFFFFFu);
  EXPECT_EQ(ParseIpv4("0.0.0.0"), 0u);
  EXPECT_FALSE(ParseIpv4("1.2.3.1000").has_value());
}

TEST(OrgDatasetTest, FromElementsSortsAndMerges) {
  Prefix24 a = Prefix24::FromValue(1), b = Prefix24::FromValue(2);
  OrgDataset d = OrgDataset::FromElements(
      "x", {{{b, 5}, 1}, {{a, 7}, 2}, {{b, 5}, 3}, {{a, 6}, 1}});
  ASSERT_EQ(d.entries().size(), 3u);
  EXPECT_EQ(d.entries()[0].element, (Element{a, 6}));
  EXPECT_EQ(d.entries()[1].element, (Element{a, 7}));
  EXPECT_EQ(d.entries()[2].element, (Element{b, 5}));
  EXPECT_EQ(d.entries()[2].count, 4u);
  EXPECT_EQ(d.multiset_size(), 7u);
  EXPECT_EQ(d.count({b, 5}), 4u);
  EXPECT_EQ(d.count({b, 6}), 0u);
  EXPECT_EQ(d.prefixes(), (std::vector<Prefix24>{a, b}));
  EXPECT_EQ(d.Presence().multiset_size(), 3u);
}

TEST(OrgDatasetTest, EmptyDataset) {
  OrgDataset d("empty");
  EXPECT_TRUE(d.empty());
  EXPECT_EQ(d.multiset_size(), 0u);
  EXPECT_TRUE(d.prefixes().empty());
}

TEST(EventLogTest, InternIsStable) {
  EventLog log;
  EXPECT_EQ(log.Intern("b"), 0u);
  EXPECT_EQ(log.Intern("a"), 1u);
  EXPECT_EQ(log.Intern("b"), 0u);
  EXPECT_EQ(log.Find("a"), 1u);
  EXPECT_FALSE(log.Find("c").has_value());
}

TEST(DayTest, FormatAndParse) {
  EXPECT_EQ(FormatDay(0), "1970-01-01");
  EXPECT_EQ(FormatDay(16572), "2015-05-17");
  EXPECT_EQ(ParseDay("2015-05-17"), 16572);
  EXPECT_FALSE(ParseDay("2015-13-01").has_value());
  EXPECT_FALSE(ParseDay("yesterday").has_value());
  for (Day d = 16000; d < 17000; d += 37) EXPECT_EQ(ParseDay(FormatDay(d)), d);
}

}  // namespace
}  // namespace cpb
