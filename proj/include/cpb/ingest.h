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

// Log ingestion: DShield-format parsing, contributor selection and sliding
// train/test windows.

#ifndef CPB_INGEST_H_
#define CPB_INGEST_H_

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "cpb/types.h"

namespace cpb {

// One parsed log line before org interning.
struct ParsedAlert {
  std::string org;
  Prefix24 attacker;
  Day day = 0;
};

// True for 0/8, RFC1918, CGNAT, loopback, link-local, the IETF/TEST-NET and
// benchmarking blocks, multicast, 240/4 and broadcast.
bool IsNonRoutable(uint32_t address);

// Parses "contributor, source-ip, source-port, target-port, timestamp".
// Fields are split on `separator` and trimmed. Returns nullopt (skip marker)
// for invalid or non-routable source addresses, and an InvalidArgument error
// for a malformed field count or timestamp.
absl::StatusOr<std::optional<ParsedAlert>> ParseDShieldLine(
    std::string_view line, char separator = '\t');

struct ParseStats {
  uint64_t lines = 0;
  uint64_t events = 0;
  uint64_t skipped = 0;
  uint64_t errors = 0;
  // First few error messages, for reporting.
  std::vector<std::string> sample_errors;
};

// Parses a whole log. Per-line errors are counted, never fatal.
EventLog ParseDShieldLog(std::istream& in, char separator, ParseStats* stats);

// Canonical event file: one "org,a.b.c.0,day-index" line per event.
// Renders events as DShield lines: contributor, source address, source port,
// target port, timestamp. Host octets, ports and times of day come from `seed`.
void WriteDShieldLog(const EventLog& log, std::ostream& out, uint64_t seed,
                     char separator = '\t');

void WriteEventFile(const EventLog& log, std::ostream& out);
absl::StatusOr<EventLog> ReadEventFile(std::istream& in);

// Organizations ordered as the selection rule ranks them.
struct ContributorRanking {
  std::vector<OrgIndex> daily_reporters;  // ranked, most unique prefixes first
  std::vector<OrgIndex> selected;
};

inline constexpr int kMinQualifyingContributors = 31;

// Keeps orgs reporting on every day of [first_day, first_day + num_days),
// ranks them by distinct attacker prefixes (ties: lexicographic org name),
// takes the top 100 and drops ranks 1-10 and 81-100. With fewer than 100
// qualifying orgs the same 10%/20% cut is applied proportionally.
absl::StatusOr<ContributorRanking> SelectContributors(const EventLog& log,
                                                      Day first_day,
                                                      int num_days);

struct WindowSpec {
  std::vector<Day> train_days;
  std::vector<Day> test_days;
};

// One sliding window. `train[i]` and `test[i]` belong to `orgs[i]`.
struct Window {
  WindowSpec spec;
  std::vector<OrgIndex> orgs;
  std::vector<OrgDataset> train;
  std::vector<OrgDataset> test;
};

// Window specs sliding by one day over [first_day, first_day + num_days).
absl::StatusOr<std::vector<WindowSpec>> MakeWindowSpecs(Day first_day,
                                                        int num_days,
                                                        int train_len = 5,
                                                        int test_len = 1);

// Materializes every window for `orgs`. Dataset multiplicities are raw event
// counts per (prefix, day).
absl::StatusOr<std::vector<Window>> BuildWindows(
    const EventLog& log, const std::vector<OrgIndex>& orgs, Day first_day,
    int num_days, int train_len = 5, int test_len = 1);

// First and last day present in the log.
std::optional<std::pair<Day, Day>> DayRange(const EventLog& log);

}  // namespace cpb

#endif  // CPB_INGEST_H_
