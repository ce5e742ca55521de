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

namespace cpb {
namespace {

std::optional<double> Ratio(double num, double den) {
  if (den == 0) return std::nullopt;
  return num / den;
}

std::optional<double> Delta(uint64_t collab, uint64_t base) {
  if (base == 0) return std::nullopt;
  return (static_cast<double>(collab) - static_cast<double>(base)) /
         static_cast<double>(base);
}

}  // namespace

Confusion Confuse(const PredictionList& prediction,
                  std::span<const Prefix24> test) {
  Confusion c;
  auto in_test = [&](Prefix24 p) {
    return std::binary_search(test.begin(), test.end(), p);
  };
  for (Prefix24 p : prediction.blacklist) (in_test(p) ? c.tp : c.fp)++;
  for (Prefix24 p : prediction.whitelist) (in_test(p) ? c.fn : c.tn)++;
  c.unreachable = test.size() - c.tp - c.fn;
  return c;
}

QualityReport Derive(const Confusion& conf, const Confusion& baseline) {
  QualityReport r;
  const double tp = static_cast<double>(conf.tp);
  const double fp = static_cast<double>(conf.fp);
  const double fn = static_cast<double>(conf.fn);
  const double tn = static_cast<double>(conf.tn);
  r.tpr = Ratio(tp, tp + fn);
  r.fpr = Ratio(fp, fp + tn);
  r.ppv = Ratio(tp, tp + fp);
  // Same value as 2*ppv*tpr/(ppv+tpr) wherever both rates are defined.
  r.f1 = Ratio(2 * tp, 2 * tp + fp + fn);
  r.tp_impr = Delta(conf.tp, baseline.tp);
  r.fp_incr = Delta(conf.fp, baseline.fp);
  r.fn_incr = Delta(conf.fn, baseline.fn);
  return r;
}

MetricSummary Summarize(std::span<const std::optional<double>> values) {
  MetricSummary s;
  std::vector<double> defined;
  defined.reserve(values.size());
  for (const auto& v : values) {
    if (v) {
      defined.push_back(*v);
    } else {
      ++s.excluded;
    }
  }
  s.count = defined.size();
  if (defined.empty()) return s;
  // Summing in sorted order makes the result independent of row order.
  std::sort(defined.begin(), defined.end());
  double sum = 0;
  for (double v : defined) sum += v;
  const double mean = sum / defined.size();
  std::vector<double> sq(defined.size());
  for (size_t i = 0; i < defined.size(); ++i) {
    sq[i] = (defined[i] - mean) * (defined[i] - mean);
  }
  std::sort(sq.begin(), sq.end());
  double total = 0;
  for (double v : sq) total += v;
  s.mean = mean;
  s.stddev = std::sqrt(total / defined.size());
  return s;
}

QualitySummary Aggregate(std::span<const QualityReport> reports) {
  QualitySummary out;
  out.rows = reports.size();
  std::vector<std::optional<double>> col(reports.size());
  auto column = [&](std::optional<double> QualityReport::*field) {
    for (size_t i = 0; i < reports.size(); ++i) col[i] = reports[i].*field;
    return Summarize(col);
  };
  out.tpr = column(&QualityReport::tpr);
  out.fpr = column(&QualityReport::fpr);
  out.ppv = column(&QualityReport::ppv);
  out.f1 = column(&QualityReport::f1);
  out.tp_impr = column(&QualityReport::tp_impr);
  out.fp_incr = column(&QualityReport::fp_incr);
  out.fn_incr = column(&QualityReport::fn_incr);
  return out;
}

}  // namespace cpb
