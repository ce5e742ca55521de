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

#include "cpb/experiment.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "absl/strings/str_split.h"
#include "gtest/gtest.h"

namespace cpb {
namespace {

ExperimentConfig SmallConfig() {
  ExperimentConfig c;
  c.synth.num_orgs = 40;
  c.synth.num_days = 7;
  c.synth.events_per_day = 300;
  c.synth.unique_per_day = 80;
  c.synth.victim_clusters = 4;
  c.synth.groups_per_cluster = 2;
  c.synth.group_prefixes = 30;
  c.synth.group_active_days = 4;
  c.synth.noise_pool = 3000;
  c.k = 4;
  return c;
}

std::string Csv(const ExperimentResult& r,
                void (*writer)(std::span<const ExperimentResult>, std::ostream&)) {
  std::ostringstream out;
  writer(std::span(&r, 1), out);
  return out.str();
}

TEST(PrepareDataTest, SelectionAndWindows) {
  auto data = PrepareData(SmallConfig());
  ASSERT_TRUE(data.ok()) << data.status();
  // 40 daily reporters: drop 4 top and 8 bottom.
  EXPECT_EQ(data->orgs.size(), 28u);
  EXPECT_EQ(data->windows.size(), 2u);
  EXPECT_EQ(data->num_days, 7);
  for (size_t i = 1; i < data->orgs.size(); ++i) {
    EXPECT_LT(data->log.orgs[data->orgs[i - 1]], data->log.orgs[data->orgs[i]]);
  }
}

TEST(PrepareDataTest, TooFewContributorsIsDataLoss) {
  ExperimentConfig c = SmallConfig();
  c.synth.num_orgs = 20;
  EXPECT_EQ(PrepareData(c).status().code(), absl::StatusCode::kDataLoss);
  c = SmallConfig();
  c.data_path = "/nonexistent/log.tsv";
  EXPECT_EQ(PrepareData(c).status().code(), absl::StatusCode::kNotFound);
}

TEST(ExperimentTest, LocalHasZeroDeltas) {
  ExperimentConfig c = SmallConfig();
  c.strategy = Strategy::kLocal;
  auto r = RunExperiment(c);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->rows.size(), 56u);
  for (const ResultRow& row : r->rows) {
    EXPECT_EQ(row.baseline, row.collab);
    if (row.quality.tp_impr) EXPECT_EQ(*row.quality.tp_impr, 0.0);
    if (row.quality.fp_incr) EXPECT_EQ(*row.quality.fp_incr, 0.0);
  }
  EXPECT_EQ(r->Collaborators(), 0u);
  EXPECT_EQ(r->AverageSize(), 1.0);
}

TEST(ExperimentTest, BlacklistAccounting) {
  auto r = RunExperiment(SmallConfig());
  ASSERT_TRUE(r.ok());
  for (const ResultRow& row : r->rows) {
    // Sharing only adds candidates, so no row loses true positives.
    EXPECT_GE(row.collab.tp + row.collab.fn, row.baseline.tp + row.baseline.fn);
  }
}

TEST(ExperimentTest, PrivateModesMatchPlaintext) {
  ExperimentConfig c = SmallConfig();
  auto data = PrepareData(c);
  ASSERT_TRUE(data.ok());
  for (Strategy s : {Strategy::kIntersection, Strategy::kIp2IpIntersection}) {
    c.strategy = s;
    c.privacy = PrivacyMode::kPlaintextOracle;
    auto plain = RunExperiment(c, *data);
    c.privacy = PrivacyMode::kPrpSim;
    auto prp = RunExperiment(c, *data);
    ASSERT_TRUE(plain.ok() && prp.ok()) << prp.status();
    ASSERT_EQ(plain->rows.size(), prp->rows.size());
    for (size_t i = 0; i < plain->rows.size(); ++i) {
      EXPECT_EQ(plain->rows[i].org, prp->rows[i].org);
      EXPECT_EQ(plain->rows[i].label, prp->rows[i].label);
      EXPECT_EQ(plain->rows[i].baseline, prp->rows[i].baseline);
      EXPECT_EQ(plain->rows[i].collab, prp->rows[i].collab);
    }
    for (const WindowStats& w : prp->windows) EXPECT_EQ(w.rejected, 0u);
  }
}

TEST(ExperimentTest, Deterministic) {
  ExperimentConfig c = SmallConfig();
  c.strategy = Strategy::kIp2Ip;
  auto a = RunExperiment(c);
  auto b = RunExperiment(c);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(Csv(*a, WriteResultsCsv), Csv(*b, WriteResultsCsv));
  EXPECT_EQ(Csv(*a, WriteSummaryCsv), Csv(*b, WriteSummaryCsv));
  c.seed = 2;
  auto other = RunExperiment(c);
  ASSERT_TRUE(other.ok());
  EXPECT_NE(Csv(*a, WriteResultsCsv), Csv(*other, WriteResultsCsv));
}

TEST(ExperimentTest, TableHasTenColumns) {
  auto r = RunExperiment(SmallConfig());
  ASSERT_TRUE(r.ok());
  std::string table = Csv(*r, WriteTableCsv);
  std::vector<std::string> lines = absl::StrSplit(table, '\n', absl::SkipEmpty());
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "clustering,k,avg_size,n_collab,tpr,ppv,tp_impr,fp_incr,fn_incr,f1");
  std::vector<std::string> cells = absl::StrSplit(lines[1], ',');
  ASSERT_EQ(cells.size(), 10u);
  EXPECT_EQ(cells[0], "kmeans");
  EXPECT_EQ(cells[1], "4");
  EXPECT_NE(cells[6].find("±"), std::string::npos);
}

TEST(ExperimentTest, GroupByWindowAddsRows) {
  ExperimentConfig c = SmallConfig();
  c.group_by_window = true;
  auto r = RunExperiment(c);
  ASSERT_TRUE(r.ok());
  std::string s = Csv(*r, WriteSummaryCsv);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 4);
}

TEST(ExperimentTest, WriteOutputsCreatesFiles) {
  auto r = RunExperiment(SmallConfig());
  ASSERT_TRUE(r.ok());
  const std::string dir = ::testing::TempDir() + "/cpb_outputs";
  ASSERT_TRUE(WriteOutputs(std::span(&*r, 1), dir).ok());
  for (const char* f : {"results.csv", "summary.csv", "table_intersection.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(dir) / f)) << f;
  }
}

TEST(SweepTest, FullGrid) {
  ExperimentConfig c = SmallConfig();
  SweepGrid grid{
      .clusterings = {ClusteringAlgorithm::kKMeans, ClusteringAlgorithm::kKnn,
                      ClusteringAlgorithm::kAgglomerative},
      .strategies = {Strategy::kLocal, Strategy::kGlobal, Strategy::kIntersection,
                     Strategy::kIp2Ip, Strategy::kIp2IpIntersection},
      .ks = {1, 5, 10, 15, 20, 25, 30, 35}};
  auto cells = Sweep(c, grid);
  ASSERT_TRUE(cells.ok()) << cells.status();
  ASSERT_EQ(cells->size(), 120u);
  size_t degenerate = 0;
  for (const SweepCell& cell : *cells) {
    if (cell.degenerate) {
      ++degenerate;
      EXPECT_GE(cell.config.k, 28);
    } else {
      EXPECT_TRUE(cell.status.ok()) << cell.status;
    }
  }
  EXPECT_EQ(degenerate, 3u * 5u * 2u);
  const std::string dir = ::testing::TempDir() + "/cpb_sweep";
  ASSERT_TRUE(WriteSweepOutputs(*cells, dir).ok());
  std::ifstream in(std::filesystem::path(dir) / "sweep_summary.csv");
  std::string line;
  size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 121u);
  SweepGrid empty = grid;
  empty.ks.clear();
  EXPECT_FALSE(Sweep(c, empty).ok());
}

TEST(ExitCodeTest, Mapping) {
  EXPECT_EQ(ExitCodeFor(absl::OkStatus()), 0);
  EXPECT_EQ(ExitCodeFor(absl::InvalidArgumentError("")), 1);
  EXPECT_EQ(ExitCodeFor(absl::DataLossError("")), 2);
  EXPECT_EQ(ExitCodeFor(absl::NotFoundError("")), 2);
  EXPECT_EQ(ExitCodeFor(absl::UnavailableError("")), 3);
  EXPECT_EQ(ExitCodeFor(absl::AbortedError("")), 3);
  EXPECT_EQ(ExitCodeFor(absl::FailedPreconditionError("")), 3);
}

}  // namespace
}  // namespace cpb
