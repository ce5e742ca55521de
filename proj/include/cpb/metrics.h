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

#ifndef CPB_METRICS_H_
#define CPB_METRICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpb/forecast.h"
#include "cpb/types.h"

namespace cpb {

// Counts against one org's test-day attackers. Attackers outside the
// candidate universe can be neither blacklisted nor whitelisted; they are
// reported as `unreachable` and enter no rate.
struct Confusion {
  uint64_t tp = 0;
  uint64_t fp = 0;
  uint64_t fn = 0;
  uint64_t tn = 0;
  uint64_t unreachable = 0;

  friend bool operator==(const Confusion&, const Confusion&) = default;
};

// `test` must be sorted and unique.
Confusion Confuse(const PredictionList& prediction,
                  std::span<const Prefix24> test);

// An unset optional marks a ratio whose denominator is zero.
struct QualityReport {
  std::optional<double> tpr;
  std::optional<double> fpr;  // tn counts whitelist prefixes absent from test
  std::optional<double> ppv;
  std::optional<double> f1;
  std::optional<double> tp_impr;
  std::optional<double> fp_incr;
  std::optional<double> fn_incr;
};

QualityReport Derive(const Confusion& conf, const Confusion& baseline);

// Mean and population standard deviation over defined values.
struct MetricSummary {
  std::optional<double> mean;
  std::optional<double> stddev;
  size_t count = 0;
  size_t excluded = 0;  // undefined entries skipped
};

MetricSummary Summarize(std::span<const std::optional<double>> values);

struct QualitySummary {
  MetricSummary tpr, fpr, ppv, f1, tp_impr, fp_incr, fn_incr;
  size_t rows = 0;
};

QualitySummary Aggregate(std::span<const QualityReport> reports);

}  // namespace cpb

#endif  // CPB_METRICS_H_
