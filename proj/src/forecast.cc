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

#include <algorithm>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace cpb {
namespace {

absl::Status CheckAlpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("alpha must be in (0, 1), got ", alpha));
  }
  return absl::OkStatus();
}

// Horner form of the weighted sum; one multiply-add per day.
double Ewma(std::span<const double> signal, double alpha) {
  double s = 0.0;
  for (double r : signal) s = (1.0 - alpha) * s + alpha * r;
  return s;
}

}  // namespace

absl::StatusOr<double> EwmaScore(std::span<const double> signal, double alpha) {
  if (absl::Status s = CheckAlpha(alpha); !s.ok()) return s;
  if (signal.empty()) return absl::InvalidArgumentError("empty signal");
  return Ewma(signal, alpha);
}

absl::StatusOr<PredictionList> Predict(const OrgDataset& local,
                                       const OrgDataset& shared,
                                       std::span<const Day> train_days,
                                       const PredictOptions& options) {
  if (absl::Status s = CheckAlpha(options.alpha); !s.ok()) return s;
  if (train_days.empty()) return absl::InvalidArgumentError("no train days");
  auto slot_of = [&](Day day) -> int {
    auto it = std::find(train_days.begin(), train_days.end(), day);
    return it == train_days.end() ? -1 : static_cast<int>(it - train_days.begin());
  };

  PredictionList out;
  out.org = local.org();
  const size_t t = train_days.size();
  std::vector<double> signal(t);

  // Both datasets are sorted by (prefix, day); walk them together one prefix
  // at a time.
  auto a = local.entries();
  auto b = shared.entries();
  size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    Prefix24 p;
    if (j >= b.size() || (i < a.size() && a[i].element.prefix <= b[j].element.prefix)) {
      p = a[i].element.prefix;
    } else {
      p = b[j].element.prefix;
    }
    std::fill(signal.begin(), signal.end(), 0.0);
    bool any = false;
    auto absorb = [&](std::span<const ElementCount> entries, size_t& k) {
      for (; k < entries.size() && entries[k].element.prefix == p; ++k) {
        int slot = slot_of(entries[k].element.day);
        if (slot < 0) continue;
        any = true;
        if (options.mode == SignalMode::kPresence) {
          signal[slot] = 1.0;
        } else {
          signal[slot] += entries[k].count;
        }
      }
    };
    absorb(a, i);
    absorb(b, j);
    if (!any) continue;
    double score = Ewma(signal, options.alpha);
    out.scores.push_back({p, score});
    (score >= options.tau ? out.blacklist : out.whitelist).push_back(p);
  }
  return out;
}

}  // namespace cpb
