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

#include "cpb/ingest.h"

#include <sstream>

#include "absl/strings/str_cat.h"
#include "gtest/gtest.h"

namespace cpb {
namespace {

TEST(IsNonRoutableTest, ReservedRanges) {
  for (const char* ip : {"0.1.2.3", "10.9.9.9", "100.64.0.1", "100.127.255.255",
                         "127.0.0.1", "169.254.3.3", "172.16.0.1", "172.31.255.1",
                         "192.0.0.5", "192.0.2.1", "192.168.1.1", "198.18.0.1",
                         "198.19.255.255", "198.51.100.7", "203.0.113.9",
                         "224.0.0.1", "239.1.1.1", "240.0.0.1", "255.255.255.255"}) {
    EXPECT_TRUE(IsNonRoutable(*ParseIpv4(ip))) << ip;
  }
  for (const char* ip : {"1.1.1.1", "8.8.8.8", "100.63.255.255", "100.128.0.0",
                         "172.15.0.1", "172.32.0.1", "192.0.1.1", "198.20.0.1",
                         "198.51.99.1", "203.0.112.1", "223.255.255.255"}) {
    EXPECT_FALSE(IsNonRoutable(*ParseIpv4(ip))) << ip;
  }
}

TEST(ParseDShieldLineTest, ValidLine) {
  auto r = ParseDShieldLine("orgA\t8.8.4.4\t1234\t22\t2015-05-17 13:45:01");
  ASSERT_TRUE(r.ok()) << r.status();
  ASSERT_TRUE(r->has_value());
  EXPECT_EQ((*r)->org, "orgA");
  EXPECT_EQ((*r)->attacker.ToString(), "8.8.4.0");
  EXPECT_EQ((*r)->day, 16572);
}

TEST(ParseDShieldLineTest, CustomSeparatorAndWhitespace) {
  auto r = ParseDShieldLine(" orgB , 8.8.4.4 ,1,2, 2015-05-18 00:00:00", ',');
  ASSERT_TRUE(r.ok()) << r.status();
  ASSERT_TRUE(r->has_value());
  EXPECT_EQ((*r)->org, "orgB");
  EXPECT_EQ((*r)->day, 16573);
}

TEST(ParseDShieldLineTest, NonRoutableAndBadAddressAreSkipped) {
  auto r = ParseDShieldLine("o\t10.0.0.1\t1\t2\t2015-05-17 00:00:00");
  ASSERT_TRUE(r.ok());
  EXPECT_FALSE(r->has_value());
  r = ParseDShieldLine("o\tnot-an-ip\t1\t2\t2015-05-17 00:00:00");
  ASSERT_TRUE(r.ok());
  EXPECT_FALSE(r->has_value());
}

TEST(ParseDShieldLineTest, Errors) {
  EXPECT_FALSE(ParseDShieldLine("o\t8.8.8.8\t1\t2").ok());
  EXPECT_FALSE(ParseDShieldLine("o\t8.8.8.8\t1\t2\t2015-02-30 00:00:00").ok());
  EXPECT_FALSE(ParseDShieldLine("o\t8.8.8.8\t1\t2\t2015-05-17").ok());
  EXPECT_FALSE(ParseDShieldLine("o\t8.8.8.8\t99999\t2\t2015-05-17 00:00:00").ok());
  EXPECT_FALSE(ParseDShieldLine("o\t8.8.8.8\tx\t2\t2015-05-17 00:00:00").ok());
}

TEST(ParseDShieldLogTest, Stats) {
  std::istringstream in(
      "# comment\n"
      "a\t8.8.8.8\t1\t2\t2015-05-17 00:00:00\n"
      "b\t9.9.9.9\t1\t2\t2015-05-17 00:00:00\n"
      "a\t10.1.1.1\t1\t2\t2015-05-17 00:00:00\n"
      "garbage\n"
      "\n"
      "a\t8.8.8.9\t1\t2\t2015-05-18 00:00:00\n");
  ParseStats stats;
  EventLog log = ParseDShieldLog(in, '\t', &stats);
  EXPECT_EQ(stats.lines, 5u);
  EXPECT_EQ(stats.events, 3u);
  EXPECT_EQ(stats.skipped, 1u);
  EXPECT_EQ(stats.errors, 1u);
  EXPECT_EQ(stats.sample_errors.size(), 1u);
  EXPECT_EQ(log.orgs, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(log.events.size(), 3u);
  EXPECT_EQ(log.events[2].org, 0u);
  EXPECT_EQ(log.events[2].day, 16573);
}

EventLog SmallLog() {
  EventLog log;
  OrgIndex a = log.Intern("alpha"), b = log.Intern("beta");
  log.events = {{a, *Prefix24::Parse("1.2.3.0"), 100},
                {b, *Prefix24::Parse("4.5.6.0"), 101},
                {a, *Prefix24::Parse("1.2.3.0"), 100}};
  return log;
}

TEST(EventFileTest, RoundTrip) {
  EventLog log = SmallLog();
  std::stringstream s;
  WriteEventFile(log, s);
  auto back = ReadEventFile(s);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->orgs, log.orgs);
  EXPECT_EQ(back->events, log.events);
}

TEST(EventFileTest, MalformedIsDataLoss) {
  for (const char* bad : {"a,1.2.3.0\n", "a,1.2.3.4,5\n", "a,1.2.3.0,x\n",
                          "a,1.2.3.0,5,6\n"}) {
    std::istringstream in(bad);
    auto r = ReadEventFile(in);
    EXPECT_EQ(r.status().code(), absl::StatusCode::kDataLoss) << bad;
  }
}

TEST(DShieldWriterTest, RoundTripsThroughParser) {
  EventLog log = SmallLog();
  std::stringstream s;
  WriteDShieldLog(log, s, 7);
  ParseStats stats;
  EventLog back = ParseDShieldLog(s, '\t', &stats);
  EXPECT_EQ(stats.errors, 0u);
  EXPECT_EQ(back.orgs, log.orgs);
  EXPECT_EQ(back.events, log.events);
}

// n orgs reporting every day on `days` days; org i sees i+1 unique prefixes.
EventLog RankedLog(int n, int days, Day first) {
  EventLog log;
  for (int i = 0; i < n; ++i) {
    OrgIndex o = log.Intern(absl::StrCat("org", 1000 + i));
    for (int d = 0; d < days; ++d) {
      for (int p = 0; p <= i; ++p) {
        log.events.push_back({o, Prefix24::FromValue(0x010000 + p), first + d});
      }
    }
  }
  return log;
}

TEST(SelectContributorsTest, HundredOrgsKeepsSeventy) {
  EventLog log = RankedLog(100, 3, 50);
  auto r = SelectContributors(log, 50, 3);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->daily_reporters.size(), 100u);
  ASSERT_EQ(r->selected.size(), 70u);
  // Ranked by unique prefixes, descending: org index 99 is first.
  EXPECT_EQ(r->daily_reporters.front(), 99u);
  EXPECT_EQ(r->selected.front(), 89u);
  EXPECT_EQ(r->selected.back(), 20u);
}

TEST(SelectContributorsTest, MissingDayDisqualifies) {
  EventLog log = RankedLog(40, 3, 50);
  // Org 0 now misses day 52.
  std::erase_if(log.events, [](const AlertEvent& e) {
    return e.org == 0 && e.day == 52;
  });
  auto r = SelectContributors(log, 50, 3);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->daily_reporters.size(), 39u);
  EXPECT_EQ(std::count(r->daily_reporters.begin(), r->daily_reporters.end(), 0u), 0);
  // 39 qualifying: drop 4 top, 8 bottom.
  EXPECT_EQ(r->selected.size(), 27u);
}

TEST(SelectContributorsTest, TooFewIsError) {
  EventLog log = RankedLog(30, 2, 0);
  EXPECT_EQ(SelectContributors(log, 0, 2).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_TRUE(SelectContributors(RankedLog(31, 2, 0), 0, 2).ok());
}

TEST(WindowTest, FifteenDaysGiveTenWindows) {
  auto specs = MakeWindowSpecs(100, 15);
  ASSERT_TRUE(specs.ok());
  ASSERT_EQ(specs->size(), 10u);
  EXPECT_EQ((*specs)[0].train_days, (std::vector<Day>{100, 101, 102, 103, 104}));
  EXPECT_EQ((*specs)[0].test_days, (std::vector<Day>{105}));
  EXPECT_EQ((*specs)[9].train_days.front(), 109);
  EXPECT_EQ((*specs)[9].test_days, (std::vector<Day>{114}));
  EXPECT_FALSE(MakeWindowSpecs(0, 5).ok());
  EXPECT_EQ(MakeWindowSpecs(0, 6)->size(), 1u);
  EXPECT_FALSE(MakeWindowSpecs(0, 10, 0, 1).ok());
}

TEST(WindowTest, BuildWindowsCounts) {
  EventLog log;
  OrgIndex a = log.Intern("a"), b = log.Intern("b");
  Prefix24 p = Prefix24::FromValue(7), q = Prefix24::FromValue(8);
  for (Day d = 0; d < 7; ++d) {
    log.events.push_back({a, p, d});
    log.events.push_back({a, p, d});
    log.events.push_back({b, q, d});
  }
  log.events.push_back({a, q, 6});
  log.events.push_back({b, q, 99});  // outside the range
  auto w = BuildWindows(log, {b, a}, 0, 7);
  ASSERT_TRUE(w.ok()) << w.status();
  ASSERT_EQ(w->size(), 2u);
  const Window& first = (*w)[0];
  EXPECT_EQ(first.train[0].org(), "b");
  EXPECT_EQ(first.train[0].multiset_size(), 5u);
  EXPECT_EQ(first.train[1].count({p, 3}), 2u);
  EXPECT_EQ(first.test[1].count({p, 5}), 2u);
  const Window& second = (*w)[1];
  EXPECT_EQ(second.test[1].multiset_size(), 3u);
  EXPECT_EQ(second.test[1].count({q, 6}), 1u);
  EXPECT_EQ(second.test[0].multiset_size(), 1u);
}

TEST(WindowTest, DayRange) {
  EXPECT_FALSE(DayRange(EventLog{}).has_value());
  auto r = DayRange(SmallLog());
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->first, 100);
  EXPECT_EQ(r->second, 101);
}

}  // namespace
}  // namespace cpb
