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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <string>

#include "absl/container/flat_hash_map.h"
#include "absl/container/flat_hash_set.h"
#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/time/civil_time.h"
#include "cpb/strings.h"

namespace cpb {
namespace {

struct Cidr {
  uint32_t base;
  int bits;
};

constexpr Cidr kNonRoutable[] = {
    {0x00000000, 8},   // 0.0.0.0/8
    {0x0A000000, 8},   // 10.0.0.0/8
    {0x64400000, 10},  // 100.64.0.0/10
    {0x7F000000, 8},   // 127.0.0.0/8
    {0xA9FE0000, 16},  // 169.254.0.0/16
    {0xAC100000, 12},  // 172.16.0.0/12
    {0xC0000000, 24},  // 192.0.0.0/24
    {0xC0000200, 24},  // 192.0.2.0/24
    {0xC0A80000, 16},  // 192.168.0.0/16
    {0xC6120000, 15},  // 198.18.0.0/15
    {0xC6336400, 24},  // 198.51.100.0/24
    {0xCB007100, 24},  // 203.0.113.0/24
    {0xE0000000, 4},   // 224.0.0.0/4
    {0xF0000000, 4},   // 240.0.0.0/4, includes 255.255.255.255
};

const absl::CivilSecond kEpochSecond(1970, 1, 1, 0, 0, 0);

std::optional<Day> ParseTimestampDay(std::string_view text) {
  // "YYYY-MM-DD HH:MM:SS"
  if (text.size() != 19 || text[10] != ' ') return std::nullopt;
  std::string iso(text);
  iso[10] = 'T';
  absl::CivilSecond t;
  if (!absl::ParseCivilTime(iso, &t)) return std::nullopt;
  // ParseCivilTime normalizes out-of-range fields; reject those.
  if (absl::FormatCivilTime(t) != iso) return std::nullopt;
  return static_cast<Day>(absl::CivilDay(t) - absl::CivilDay(kEpochSecond));
}

bool ParsePort(std::string_view text) {
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size() && value <= 65535;
}

}  // namespace

bool IsNonRoutable(uint32_t address) {
  for (const Cidr& c : kNonRoutable) {
    uint32_t mask = c.bits == 0 ? 0 : ~uint32_t{0} << (32 - c.bits);
    if ((address & mask) == c.base) return true;
  }
  return false;
}

absl::StatusOr<std::optional<ParsedAlert>> ParseDShieldLine(
    std::string_view line, char separator) {
  std::vector<std::string_view> fields;
  for (absl::string_view f :
       absl::StrSplit(Sv(line), separator, absl::SkipEmpty())) {
    fields.push_back(Sv(absl::StripAsciiWhitespace(f)));
  }
  if (fields.size() < 5) {
    return absl::InvalidArgumentError(
        absl::StrCat("expected 5 fields, got ", fields.size()));
  }
  if (fields[0].empty()) return absl::InvalidArgumentError("empty contributor");
  auto day = ParseTimestampDay(fields[4]);
  if (!day) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad timestamp '", Sv(fields[4]), "'"));
  }
  // Ports are validated for well-formedness and then dropped.
  if (!ParsePort(fields[2]) || !ParsePort(fields[3])) {
    return absl::InvalidArgumentError("bad port field");
  }
  auto address = ParseIpv4(fields[1]);
  if (!address || IsNonRoutable(*address)) return std::optional<ParsedAlert>();
  return std::optional<ParsedAlert>(ParsedAlert{
      std::string(fields[0]), Prefix24::FromAddress(*address), *day});
}

EventLog ParseDShieldLog(std::istream& in, char separator, ParseStats* stats) {
  EventLog log;
  absl::flat_hash_map<std::string, OrgIndex> index;
  ParseStats local;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    ++local.lines;
    auto parsed = ParseDShieldLine(line, separator);
    if (!parsed.ok()) {
      ++local.errors;
      if (local.sample_errors.size() < 10) {
        local.sample_errors.push_back(absl::StrCat(
            "line ", local.lines, ": ", parsed.status().message()));
      }
      continue;
    }
    if (!parsed->has_value()) {
      ++local.skipped;
      continue;
    }
    ParsedAlert& alert = **parsed;
    auto [it, inserted] = index.try_emplace(
        alert.org, static_cast<OrgIndex>(log.orgs.size()));
    if (inserted) log.orgs.push_back(alert.org);
    log.events.push_back({it->second, alert.attacker, alert.day});
    ++local.events;
  }
  if (stats != nullptr) *stats = std::move(local);
  return log;
}

void WriteDShieldLog(const EventLog& log, std::ostream& out, uint64_t seed,
                     char separator) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> host(1, 254);
  std::uniform_int_distribution<int> port(1, 65535);
  std::uniform_int_distribution<int> second(0, 86399);
  for (const AlertEvent& e : log.events) {
    const uint32_t v = e.attacker.value();
    const int s = second(rng);
    out << log.orgs[e.org] << separator << (v >> 16) << '.' << ((v >> 8) & 0xFF)
        << '.' << (v & 0xFF) << '.' << host(rng) << separator << port(rng)
        << separator << port(rng) << separator << FormatDay(e.day)
        << absl::StrFormat(" %02d:%02d:%02d", s / 3600, s / 60 % 60, s % 60) << "\n";
  }
}

void WriteEventFile(const EventLog& log, std::ostream& out) {
  for (const AlertEvent& e : log.events) {
    out << log.orgs[e.org] << ',' << e.attacker.ToString() << ',' << e.day
        << '\n';
  }
}

absl::StatusOr<EventLog> ReadEventFile(std::istream& in) {
  EventLog log;
  absl::flat_hash_map<std::string, OrgIndex> index;
  std::string line;
  uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string_view> f;
    for (absl::string_view piece : absl::StrSplit(line, ',')) f.push_back(Sv(piece));
    if (f.size() != 3) {
      return absl::DataLossError(
          absl::StrCat("event file line ", line_no, ": expected 3 fields"));
    }
    auto address = ParseIpv4(f[1]);
    Day day = 0;
    auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), day);
    if (!address || (*address & 0xFF) != 0 || ec != std::errc() ||
        ptr != f[2].data() + f[2].size()) {
      return absl::DataLossError(
          absl::StrCat("event file line ", line_no, ": malformed record"));
    }
    auto [it, inserted] =
        index.try_emplace(std::string(f[0]), static_cast<OrgIndex>(log.orgs.size()));
    if (inserted) log.orgs.emplace_back(f[0]);
    log.events.push_back({it->second, Prefix24::FromAddress(*address), day});
  }
  return log;
}

absl::StatusOr<ContributorRanking> SelectContributors(const EventLog& log,
                                                      Day first_day,
                                                      int num_days) {
  if (num_days <= 0) return absl::InvalidArgumentError("empty date range");
  const size_t n = log.orgs.size();
  std::vector<std::vector<bool>> reported(n, std::vector<bool>(num_days));
  std::vector<absl::flat_hash_set<Prefix24>> uniques(n);
  for (const AlertEvent& e : log.events) {
    if (e.day < first_day || e.day >= first_day + num_days) continue;
    reported[e.org][e.day - first_day] = true;
    uniques[e.org].insert(e.attacker);
  }

  ContributorRanking ranking;
  for (OrgIndex o = 0; o < n; ++o) {
    if (std::all_of(reported[o].begin(), reported[o].end(),
                    [](bool b) { return b; })) {
      ranking.daily_reporters.push_back(o);
    }
  }
  std::sort(ranking.daily_reporters.begin(), ranking.daily_reporters.end(),
            [&](OrgIndex a, OrgIndex b) {
              if (uniques[a].size() != uniques[b].size()) {
                return uniques[a].size() > uniques[b].size();
              }
              return log.orgs[a] < log.orgs[b];
            });

  const size_t qualifying = ranking.daily_reporters.size();
  if (qualifying < kMinQualifyingContributors) {
    return absl::InvalidArgumentError(absl::StrCat(
        "only ", qualifying, " organizations report every day; need at least ",
        kMinQualifyingContributors));
  }
  const size_t top = std::min<size_t>(qualifying, 100);
  const size_t drop_top = static_cast<size_t>(std::lround(top * 0.10));
  const size_t drop_bottom = static_cast<size_t>(std::lround(top * 0.20));
  ranking.selected.assign(ranking.daily_reporters.begin() + drop_top,
                          ranking.daily_reporters.begin() + (top - drop_bottom));
  return ranking;
}

absl::StatusOr<std::vector<WindowSpec>> MakeWindowSpecs(Day first_day,
                                                        int num_days,
                                                        int train_len,
                                                        int test_len) {
  if (train_len < 1 || test_len < 1) {
    return absl::InvalidArgumentError("window lengths must be positive");
  }
  if (num_days < train_len + test_len) {
    return absl::InvalidArgumentError(absl::StrCat(
        "date range of ", num_days, " days is shorter than one window (",
        train_len, "+", test_len, ")"));
  }
  std::vector<WindowSpec> specs;
  for (int start = 0; start + train_len + test_len <= num_days; ++start) {
    WindowSpec spec;
    for (int d = 0; d < train_len; ++d) {
      spec.train_days.push_back(first_day + start + d);
    }
    for (int d = 0; d < test_len; ++d) {
      spec.test_days.push_back(first_day + start + train_len + d);
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

absl::StatusOr<std::vector<Window>> BuildWindows(
    const EventLog& log, const std::vector<OrgIndex>& orgs, Day first_day,
    int num_days, int train_len, int test_len) {
  auto specs = MakeWindowSpecs(first_day, num_days, train_len, test_len);
  if (!specs.ok()) return specs.status();

  // Per (org, day) element counts, built once and reused by every window.
  std::vector<int> position(log.orgs.size(), -1);
  for (size_t i = 0; i < orgs.size(); ++i) {
    if (orgs[i] >= log.orgs.size()) {
      return absl::InvalidArgumentError("unknown organization index");
    }
    position[orgs[i]] = static_cast<int>(i);
  }
  std::vector<std::vector<std::vector<Prefix24>>> by_day(
      orgs.size(), std::vector<std::vector<Prefix24>>(num_days));
  for (const AlertEvent& e : log.events) {
    if (e.day < first_day || e.day >= first_day + num_days) continue;
    int p = position[e.org];
    if (p < 0) continue;
    by_day[p][e.day - first_day].push_back(e.attacker);
  }
  std::vector<std::vector<std::vector<ElementCount>>> counts(
      orgs.size(), std::vector<std::vector<ElementCount>>(num_days));
  for (size_t p = 0; p < orgs.size(); ++p) {
    for (int d = 0; d < num_days; ++d) {
      auto& prefixes = by_day[p][d];
      std::sort(prefixes.begin(), prefixes.end());
      auto& out = counts[p][d];
      for (Prefix24 prefix : prefixes) {
        if (!out.empty() && out.back().element.prefix == prefix) {
          ++out.back().count;
        } else {
          out.push_back({{prefix, first_day + d}, 1});
        }
      }
      prefixes = {};
    }
  }

  auto collect = [&](size_t p, const std::vector<Day>& days) {
    std::vector<ElementCount> entries;
    for (Day day : days) {
      const auto& c = counts[p][day - first_day];
      entries.insert(entries.end(), c.begin(), c.end());
    }
    return OrgDataset::FromElements(log.orgs[orgs[p]], std::move(entries));
  };

  std::vector<Window> windows;
  windows.reserve(specs->size());
  for (WindowSpec& spec : *specs) {
    Window w;
    w.orgs = orgs;
    for (size_t p = 0; p < orgs.size(); ++p) {
      w.train.push_back(collect(p, spec.train_days));
      w.test.push_back(collect(p, spec.test_days));
    }
    w.spec = std::move(spec);
    windows.push_back(std::move(w));
  }
  return windows;
}

std::optional<std::pair<Day, Day>> DayRange(const EventLog& log) {
  if (log.events.empty()) return std::nullopt;
  auto [lo, hi] = std::minmax_element(
      log.events.begin(), log.events.end(),
      [](const AlertEvent& a, const AlertEvent& b) { return a.day < b.day; });
  return std::make_pair(lo->day, hi->day);
}

}  // namespace cpb
