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

#ifndef CPB_TYPES_H_
#define CPB_TYPES_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cpb {

// Days since 1970-01-01 (UTC). The pipeline never looks below day resolution.
using Day = int32_t;

// Index of an organization in the current org table. Modules below the harness
// address organizations by index; names live in EventLog::orgs.
using OrgIndex = uint32_t;

// The /24 network of an IPv4 address, stored as the upper 24 bits.
class Prefix24 {
 public:
  constexpr Prefix24() = default;
  static constexpr Prefix24 FromValue(uint32_t value) {
    return Prefix24(value & 0xFFFFFFu);
  }
  static constexpr Prefix24 FromAddress(uint32_t address) {
    return Prefix24(address >> 8);
  }
  // Parses "a.b.c.d" (decimal octets, leading zeros allowed). Only syntax is
  // checked here; routability is the ingest filter's job.
  static std::optional<Prefix24> Parse(std::string_view dotted_quad);

  constexpr uint32_t value() const { return value_; }
  // "a.b.c.0"
  std::string ToString() const;

  friend constexpr auto operator<=>(Prefix24, Prefix24) = default;

  template <typename H>
  friend H AbslHashValue(H h, Prefix24 p) {
    return H::combine(std::move(h), p.value_);
  }

 private:
  constexpr explicit Prefix24(uint32_t v) : value_(v) {}
  uint32_t value_ = 0;
};

// Parses a dotted-quad IPv4 address into host-order uint32.
std::optional<uint32_t> ParseIpv4(std::string_view dotted_quad);

struct AlertEvent {
  OrgIndex org = 0;
  Prefix24 attacker;
  Day day = 0;

  friend auto operator<=>(const AlertEvent&, const AlertEvent&) = default;
};

// A set of alerts plus the org-name table its indices refer to.
struct EventLog {
  std::vector<std::string> orgs;
  std::vector<AlertEvent> events;

  // Returns the index for `name`, appending it if unseen.
  OrgIndex Intern(std::string_view name);
  std::optional<OrgIndex> Find(std::string_view name) const;
};

// A multiset element: one attacker prefix on one day.
struct Element {
  Prefix24 prefix;
  Day day = 0;

  friend constexpr auto operator<=>(const Element&, const Element&) = default;

  template <typename H>
  friend H AbslHashValue(H h, const Element& e) {
    return H::combine(std::move(h), e.prefix, e.day);
  }
};

struct ElementCount {
  Element element;
  uint32_t count = 0;

  friend auto operator<=>(const ElementCount&, const ElementCount&) = default;
};

// D_i: the multiset of (prefix, day) alerts one organization holds, stored as
// sorted unique elements with multiplicities >= 1.
class OrgDataset {
 public:
  OrgDataset() = default;
  explicit OrgDataset(std::string org) : org_(std::move(org)) {}

  // Accumulates counts; entries need not be sorted or unique.
  static OrgDataset FromElements(std::string org,
                                 std::vector<ElementCount> entries);

  const std::string& org() const { return org_; }
  std::span<const ElementCount> entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  // Sum of multiplicities.
  uint64_t multiset_size() const;
  // Multiplicity of `e`, 0 when absent.
  uint32_t count(const Element& e) const;
  // Sorted distinct prefixes.
  std::vector<Prefix24> prefixes() const;
  // Same elements with every multiplicity set to 1.
  OrgDataset Presence() const;

  friend bool operator==(const OrgDataset&, const OrgDataset&) = default;

 private:
  std::string org_;
  std::vector<ElementCount> entries_;
};

// Formats a day index as YYYY-MM-DD.
std::string FormatDay(Day day);
// Parses YYYY-MM-DD.
std::optional<Day> ParseDay(std::string_view text);

}  // namespace cpb

#endif  // CPB_TYPES_H_
