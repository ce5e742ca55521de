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

#include <algorithm>
#include <charconv>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/time/civil_time.h"
#include "cpb/strings.h"

namespace cpb {
namespace {

const absl::CivilDay kEpoch(1970, 1, 1);

}  // namespace

std::optional<uint32_t> ParseIpv4(std::string_view text) {
  uint32_t address = 0;
  int octets = 0;
  size_t pos = 0;
  while (octets < 4) {
    size_t end = text.find('.', pos);
    if (octets < 3 && end == std::string_view::npos) return std::nullopt;
    if (octets == 3) end = text.size();
    std::string_view part = text.substr(pos, end - pos);
    if (part.empty() || part.size() > 3) return std::nullopt;
    unsigned value = 0;
    auto [ptr, ec] =
        std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || ptr != part.data() + part.size() || value > 255) {
      return std::nullopt;
    }
    address = (address << 8) | value;
    ++octets;
    pos = end + 1;
  }
  return address;
}

std::optional<Prefix24> Prefix24::Parse(std::string_view dotted_quad) {
  auto address = ParseIpv4(dotted_quad);
  if (!address) return std::nullopt;
  return FromAddress(*address);
}

std::string Prefix24::ToString() const {
  return absl::StrCat((value_ >> 16) & 0xFF, ".", (value_ >> 8) & 0xFF, ".",
                      value_ & 0xFF, ".0");
}

OrgIndex EventLog::Intern(std::string_view name) {
  if (auto found = Find(name)) return *found;
  orgs.emplace_back(name);
  return static_cast<OrgIndex>(orgs.size() - 1);
}

std::optional<OrgIndex> EventLog::Find(std::string_view name) const {
  auto it = std::find(orgs.begin(), orgs.end(), name);
  if (it == orgs.end()) return std::nullopt;
  return static_cast<OrgIndex>(it - orgs.begin());
}

OrgDataset OrgDataset::FromElements(std::string org,
                                    std::vector<ElementCount> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const ElementCount& a, const ElementCount& b) {
              return a.element < b.element;
            });
  OrgDataset out(std::move(org));
  for (const ElementCount& e : entries) {
    if (e.count == 0) continue;
    if (!out.entries_.empty() && out.entries_.back().element == e.element) {
      out.entries_.back().count += e.count;
    } else {
      out.entries_.push_back(e);
    }
  }
  return out;
}

uint64_t OrgDataset::multiset_size() const {
  uint64_t total = 0;
  for (const ElementCount& e : entries_) total += e.count;
  return total;
}

uint32_t OrgDataset::count(const Element& e) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), e,
      [](const ElementCount& a, const Element& b) { return a.element < b; });
  if (it == entries_.end() || it->element != e) return 0;
  return it->count;
}

std::vector<Prefix24> OrgDataset::prefixes() const {
  std::vector<Prefix24> out;
  for (const ElementCount& e : entries_) {
    if (out.empty() || out.back() != e.element.prefix) {
      out.push_back(e.element.prefix);
    }
  }
  return out;
}

OrgDataset OrgDataset::Presence() const {
  OrgDataset out(org_);
  out.entries_ = entries_;
  for (ElementCount& e : out.entries_) e.count = 1;
  return out;
}

std::string FormatDay(Day day) {
  absl::CivilDay d = kEpoch + day;
  return absl::StrFormat("%04d-%02d-%02d", d.year(), d.month(), d.day());
}

std::optional<Day> ParseDay(std::string_view text) {
  absl::CivilDay d;
  if (!absl::ParseCivilTime(Sv(text), &d)) return std::nullopt;
  return static_cast<Day>(d - kEpoch);
}

}  // namespace cpb
