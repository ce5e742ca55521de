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

#include "cpb/config.h"

#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "cpb/strings.h"

namespace cpb {
namespace {

using Setter = std::function<absl::Status(ExperimentConfig&, std::string_view)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Field {
  std::string key;
  Getter get;
  Setter set;
};

absl::Status BadValue(std::string_view key, std::string_view value) {
  return absl::InvalidArgumentError(
      absl::StrCat("bad value '", Sv(value), "' for key ", Sv(key)));
}

template <typename T>
Field IntField(std::string key, T ExperimentConfig::*member) {
  return {key,
          [member](const ExperimentConfig& c) { return absl::StrCat(c.*member); },
          [key, member](ExperimentConfig& c, std::string_view v) {
            int64_t parsed;
            if (!absl::SimpleAtoi(Sv(v), &parsed)) return BadValue(key, v);
            c.*member = static_cast<T>(parsed);
            return absl::OkStatus();
          }};
}

Field SynthIntField(std::string key, int SynthConfig::*member) {
  return {key,
          [member](const ExperimentConfig& c) { return absl::StrCat(c.synth.*member); },
          [key, member](ExperimentConfig& c, std::string_view v) {
            int parsed;
            if (!absl::SimpleAtoi(Sv(v), &parsed)) return BadValue(key, v);
            c.synth.*member = parsed;
            return absl::OkStatus();
          }};
}

std::string FormatDouble(double d) { return absl::StrFormat("%.17g", d); }

Field DoubleField(std::string key, double ExperimentConfig::*member) {
  return {key, [member](const ExperimentConfig& c) { return FormatDouble(c.*member); },
          [key, member](ExperimentConfig& c, std::string_view v) {
            if (!absl::SimpleAtod(Sv(v), &(c.*member))) return BadValue(key, v);
            return absl::OkStatus();
          }};
}

Field SynthDoubleField(std::string key, double SynthConfig::*member) {
  return {key,
          [member](const ExperimentConfig& c) { return FormatDouble(c.synth.*member); },
          [key, member](ExperimentConfig& c, std::string_view v) {
            if (!absl::SimpleAtod(Sv(v), &(c.synth.*member))) return BadValue(key, v);
            return absl::OkStatus();
          }};
}

Field BoolField(std::string key, bool ExperimentConfig::*member) {
  return {key,
          [member](const ExperimentConfig& c) {
            return std::string(c.*member ? "true" : "false");
          },
          [key, member](ExperimentConfig& c, std::string_view v) {
            if (!absl::SimpleAtob(Sv(v), &(c.*member))) return BadValue(key, v);
            return absl::OkStatus();
          }};
}

template <typename E, typename NameFn, typename ParseFn>
Field EnumField(std::string key, E ExperimentConfig::*member, NameFn name,
                ParseFn parse) {
  return {key,
          [member, name](const ExperimentConfig& c) {
            return std::string(name(c.*member));
          },
          [member, parse](ExperimentConfig& c, std::string_view v) -> absl::Status {
            auto parsed = parse(v);
            if (!parsed.ok()) return parsed.status();
            c.*member = *parsed;
            return absl::OkStatus();
          }};
}

std::string_view SignalName(SignalMode m) {
  return m == SignalMode::kPresence ? "presence" : "count";
}

absl::StatusOr<SignalMode> ParseSignal(std::string_view v) {
  if (v == "presence") return SignalMode::kPresence;
  if (v == "count") return SignalMode::kCount;
  return absl::InvalidArgumentError(absl::StrCat("unknown signal '", Sv(v), "'"));
}

std::string_view FormatName(DataFormat f) {
  return f == DataFormat::kDShield ? "dshield" : "events";
}

absl::StatusOr<DataFormat> ParseFormat(std::string_view v) {
  if (v == "dshield") return DataFormat::kDShield;
  if (v == "events") return DataFormat::kEvents;
  return absl::InvalidArgumentError(absl::StrCat("unknown data_format '", Sv(v), "'"));
}

const std::vector<Field>& Fields() {
  static const auto* fields = new std::vector<Field>{
      {"data_path", [](const ExperimentConfig& c) { return c.data_path; },
       [](ExperimentConfig& c, std::string_view v) {
         c.data_path = std::string(v);
         return absl::OkStatus();
       }},
      EnumField("data_format", &ExperimentConfig::data_format, FormatName, ParseFormat),
      {"separator",
       [](const ExperimentConfig& c) {
         if (c.separator == '\t') return std::string("tab");
         if (c.separator == ',') return std::string("comma");
         return std::string(1, c.separator);
       },
       [](ExperimentConfig& c, std::string_view v) {
         if (v == "tab") {
           c.separator = '\t';
         } else if (v == "comma") {
           c.separator = ',';
         } else if (v.size() == 1) {
           c.separator = v[0];
         } else {
           return BadValue("separator", v);
         }
         return absl::OkStatus();
       }},
      SynthIntField("synth.num_orgs", &SynthConfig::num_orgs),
      SynthIntField("synth.num_days", &SynthConfig::num_days),
      {"synth.first_day",
       [](const ExperimentConfig& c) { return FormatDay(c.synth.first_day); },
       [](ExperimentConfig& c, std::string_view v) {
         auto d = ParseDay(v);
         if (!d) return BadValue("synth.first_day", v);
         c.synth.first_day = *d;
         return absl::OkStatus();
       }},
      SynthDoubleField("synth.events_per_day", &SynthConfig::events_per_day),
      SynthDoubleField("synth.unique_per_day", &SynthConfig::unique_per_day),
      SynthIntField("synth.victim_clusters", &SynthConfig::victim_clusters),
      SynthIntField("synth.groups_per_cluster", &SynthConfig::groups_per_cluster),
      SynthIntField("synth.group_prefixes", &SynthConfig::group_prefixes),
      SynthIntField("synth.group_active_days", &SynthConfig::group_active_days),
      SynthDoubleField("synth.hit_probability", &SynthConfig::hit_probability),
      SynthDoubleField("synth.noise_rate", &SynthConfig::noise_rate),
      SynthIntField("synth.noise_pool", &SynthConfig::noise_pool),
      SynthDoubleField("synth.persistent_pool_factor",
                       &SynthConfig::persistent_pool_factor),
      SynthDoubleField("synth.daily_reporter_fraction",
                       &SynthConfig::daily_reporter_fraction),
      SynthDoubleField("synth.rate_spread", &SynthConfig::rate_spread),
      IntField("seed", &ExperimentConfig::seed),
      {"first_day",
       [](const ExperimentConfig& c) {
         return c.first_day == 0 ? std::string("auto") : FormatDay(c.first_day);
       },
       [](ExperimentConfig& c, std::string_view v) {
         if (v == "auto") {
           c.first_day = 0;
           return absl::OkStatus();
         }
         auto d = ParseDay(v);
         if (!d) return BadValue("first_day", v);
         c.first_day = *d;
         return absl::OkStatus();
       }},
      IntField("num_days", &ExperimentConfig::num_days),
      IntField("train_days", &ExperimentConfig::train_days),
      IntField("test_days", &ExperimentConfig::test_days),
      DoubleField("alpha", &ExperimentConfig::alpha),
      DoubleField("tau", &ExperimentConfig::tau),
      EnumField("signal", &ExperimentConfig::signal, SignalName, ParseSignal),
      EnumField("strategy", &ExperimentConfig::strategy, StrategyName, ParseStrategy),
      EnumField("clustering", &ExperimentConfig::clustering, ClusteringName,
                ParseClustering),
      IntField("k", &ExperimentConfig::k),
      DoubleField("threshold_pct", &ExperimentConfig::threshold_pct),
      IntField("heavy_hitters", &ExperimentConfig::heavy_hitters),
      IntField("k_rec", &ExperimentConfig::k_rec),
      DoubleField("pair_pct", &ExperimentConfig::pair_pct),
      IntField("pair_x", &ExperimentConfig::pair_x),
      BoolField("pair_mutual", &ExperimentConfig::pair_mutual),
      EnumField("privacy", &ExperimentConfig::privacy, PrivacyModeName,
                ParsePrivacyMode),
      IntField("network_timeout_ms", &ExperimentConfig::network_timeout_ms),
      BoolField("group_by_window", &ExperimentConfig::group_by_window),
  };
  return *fields;
}

}  // namespace

std::string_view PrivacyModeName(PrivacyMode m) {
  switch (m) {
    case PrivacyMode::kPlaintextOracle:
      return "plaintext-oracle";
    case PrivacyMode::kPrpSim:
      return "prp-sim";
    case PrivacyMode::kNetworked:
      return "networked";
  }
  return "?";
}

absl::StatusOr<PrivacyMode> ParsePrivacyMode(std::string_view name) {
  for (PrivacyMode m :
       {PrivacyMode::kPlaintextOracle, PrivacyMode::kPrpSim, PrivacyMode::kNetworked}) {
    if (PrivacyModeName(m) == name) return m;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown privacy mode '", Sv(name), "'"));
}

absl::Status ValidateConfig(const ExperimentConfig& c) {
  auto fail = [](auto&&... parts) {
    return absl::InvalidArgumentError(absl::StrCat(parts...));
  };
  if (!(c.alpha > 0 && c.alpha < 1)) return fail("alpha must be in (0, 1)");
  if (!(c.tau > 0)) return fail("tau must be positive");
  if (c.train_days < 1 || c.test_days < 1) {
    return fail("train_days and test_days must be >= 1");
  }
  if (c.num_days < 0) return fail("num_days must be >= 0");
  if (c.k < 1) return fail("k must be >= 1");
  if (!(c.threshold_pct >= 0 && c.threshold_pct <= 100)) {
    return fail("threshold_pct must be in [0, 100]");
  }
  if (c.heavy_hitters < 1 || c.k_rec < 1) {
    return fail("heavy_hitters and k_rec must be >= 1");
  }
  if (!(c.pair_pct > 0 && c.pair_pct <= 100)) return fail("pair_pct must be in (0, 100]");
  if (c.pair_x < 1) return fail("pair_x must be >= 1");
  if (c.network_timeout_ms < 1) return fail("network_timeout_ms must be >= 1");
  if (c.privacy != PrivacyMode::kPlaintextOracle && c.signal != SignalMode::kPresence) {
    return fail("privacy mode ", Sv(PrivacyModeName(c.privacy)),
                " carries no counts; use signal = presence");
  }
  if (c.data_path.empty()) {
    const SynthConfig& s = c.synth;
    if (s.num_orgs < 1 || s.num_days < 1 || s.victim_clusters < 1 ||
        s.groups_per_cluster < 0 || s.group_prefixes < 1 || s.group_active_days < 1 ||
        s.noise_pool < 1) {
      return fail("synth sizes must be positive");
    }
    if (!(s.hit_probability >= 0 && s.hit_probability <= 1) ||
        !(s.noise_rate >= 0 && s.noise_rate <= 1) ||
        !(s.daily_reporter_fraction >= 0 && s.daily_reporter_fraction <= 1) ||
        !(s.rate_spread >= 0 && s.rate_spread < 1)) {
      return fail("synth probabilities out of range");
    }
    if (!(s.events_per_day >= s.unique_per_day && s.unique_per_day > 0)) {
      return fail("synth.events_per_day must be >= synth.unique_per_day > 0");
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<ExperimentConfig> ParseConfig(std::string_view text) {
  ExperimentConfig c;
  int line_no = 0;
  for (absl::string_view raw : absl::StrSplit(Sv(text), '\n')) {
    ++line_no;
    absl::string_view line = raw.substr(0, raw.find('#'));
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("config line ", line_no, ": expected key = value"));
    }
    std::string key(absl::StripAsciiWhitespace(line.substr(0, eq)));
    absl::string_view value = absl::StripAsciiWhitespace(line.substr(eq + 1));
    bool found = false;
    for (const Field& f : Fields()) {
      if (f.key != key) continue;
      found = true;
      if (absl::Status s = f.set(c, Sv(value)); !s.ok()) {
        return absl::InvalidArgumentError(
            absl::StrCat("config line ", line_no, ": ", s.message()));
      }
    }
    if (!found) {
      return absl::InvalidArgumentError(
          absl::StrCat("config line ", line_no, ": unknown key '", key, "'"));
    }
  }
  if (absl::Status s = ValidateConfig(c); !s.ok()) return s;
  return c;
}

absl::StatusOr<ExperimentConfig> LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::InvalidArgumentError(absl::StrCat("cannot read config ", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseConfig(buf.str());
}

std::string SerializeConfig(const ExperimentConfig& c) {
  std::string out;
  for (const Field& f : Fields()) absl::StrAppend(&out, f.key, " = ", f.get(c), "\n");
  return out;
}

uint64_t SubSeed(uint64_t master, std::string_view name) {
  // FNV-1a over the name, folded into the master seed with splitmix64.
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  uint64_t z = master ^ h;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace cpb
