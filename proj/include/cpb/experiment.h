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

#ifndef CPB_EXPERIMENT_H_
#define CPB_EXPERIMENT_H_

#include <array>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "cpb/config.h"
#include "cpb/ingest.h"
#include "cpb/metrics.h"

namespace cpb {

struct PreparedData {
  EventLog log;
  ContributorRanking ranking;
  // Selected contributors sorted by name; every window uses this order.
  std::vector<OrgIndex> orgs;
  Day first_day = 0;
  int num_days = 0;
  std::vector<Window> windows;
  ParseStats parse_stats;
};

// Loads (or synthesizes) the log, selects contributors and cuts windows.
absl::StatusOr<PreparedData> PrepareData(const ExperimentConfig& config);

struct ResultRow {
  size_t window = 0;
  std::string org;
  int label = -1;
  bool outlier = false;
  Confusion baseline;
  Confusion collab;
  QualityReport quality;
};

struct WindowStats {
  size_t window = 0;
  Day first_train_day = 0;
  size_t orgs = 0;
  double avg_size = 0;
  size_t collaborators = 0;
  uint64_t rejected = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ResultRow> rows;
  std::vector<WindowStats> windows;
  QualitySummary summary;

  // Mean over windows.
  double AverageSize() const;
  // Summed over windows.
  size_t Collaborators() const;
};

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config,
                                               const PreparedData& data);
absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config);

inline constexpr std::array<std::string_view, 10> kTableColumns = {
    "clustering", "k",       "avg_size", "n_collab", "tpr",
    "ppv",        "tp_impr", "fp_incr",  "fn_incr",  "f1"};

void WriteResultsCsv(std::span<const ExperimentResult> results, std::ostream& out);
void WriteSummaryCsv(std::span<const ExperimentResult> results, std::ostream& out);
// Table-shaped summary; rows in the given order.
void WriteTableCsv(std::span<const ExperimentResult> results, std::ostream& out);

// results.csv, summary.csv and one table_<strategy>.csv per strategy.
absl::Status WriteOutputs(std::span<const ExperimentResult> results,
                          const std::string& out_dir);

struct SweepGrid {
  std::vector<ClusteringAlgorithm> clusterings;
  std::vector<Strategy> strategies;
  std::vector<int> ks;
};

struct SweepCell {
  ExperimentConfig config;
  absl::Status status;
  std::optional<ExperimentResult> result;
  // k at or above the contributor count: every cluster is a singleton.
  bool degenerate = false;
};

// Runs every grid cell on one shared ingestion. Cell failures are recorded
// and the sweep continues.
absl::StatusOr<std::vector<SweepCell>> Sweep(const ExperimentConfig& base,
                                             const SweepGrid& grid);

// sweep_summary.csv (one row per cell) and table_<strategy>.csv.
absl::Status WriteSweepOutputs(std::span<const SweepCell> cells,
                               const std::string& out_dir);

// Process exit code for a failed status: 1 config, 2 data, 3 protocol.
int ExitCodeFor(const absl::Status& status);

}  // namespace cpb

#endif  // CPB_EXPERIMENT_H_
