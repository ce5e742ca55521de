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

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <thread>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "cpb/forecast.h"
#include "cpb/network_round.h"
#include "cpb/privacy.h"
#include "cpb/sharing.h"
#include "cpb/similarity.h"
#include "cpb/strings.h"
#include "cpb/synth.h"
#include "glog/logging.h"

namespace cpb {
namespace {

absl::Status AsDataError(const absl::Status& s, std::string_view context) {
  return absl::DataLossError(absl::StrCat(Sv(context), ": ", s.message()));
}

absl::Status WithWindow(const absl::Status& s, size_t window) {
  return absl::Status(s.code(), absl::StrCat("window ", window, ": ", s.message()));
}

struct WindowOutcome {
  std::vector<ResultRow> rows;
  WindowStats stats;
};

bool UsesClusters(Strategy s) {
  return s != Strategy::kLocal && s != Strategy::kPairGlobal &&
         s != Strategy::kPairLocal;
}

absl::StatusOr<WindowOutcome> ProcessWindow(const ExperimentConfig& c,
                                            const Window& window, size_t index) {
  const std::vector<OrgDataset>& train = window.train;
  const std::vector<Day>& train_days = window.spec.train_days;
  const size_t n = train.size();

  ClusteringSpec spec;
  spec.algorithm = c.clustering;
  spec.k = c.k;
  spec.threshold_pct = c.threshold_pct;
  spec.seed = SubSeed(c.seed, absl::StrCat("clustering/", index));

  ShareOptions share;
  share.strategy = c.strategy;
  share.pair_pct = c.pair_pct;
  share.pair_x = c.pair_x;
  share.pair_mutual = c.pair_mutual;
  share.heavy_hitters = c.heavy_hitters;
  share.k_rec = c.k_rec;

  WindowOutcome out;
  out.stats.window = index;
  out.stats.first_train_day = train_days.front();
  out.stats.orgs = n;

  SimilarityMatrix o2o;
  ClusterAssignment assignment;
  std::vector<SharedPool> pools(n);
  for (OrgIndex i = 0; i < n; ++i) pools[i].org = i;

  if (c.strategy != Strategy::kLocal) {
    std::optional<RoundOutput> round;
    if (c.privacy == PrivacyMode::kPlaintextOracle) {
      o2o = O2oPlain(train);
      if (UsesClusters(c.strategy)) {
        auto a = Cluster(o2o, spec);
        if (!a.ok()) return a.status();
        assignment = *std::move(a);
      }
    } else {
      auto key = GenerateSharedKey();
      if (!key.ok()) return key.status();
      if (c.privacy == PrivacyMode::kPrpSim) {
        auto r = SimulateRound(train, *key, spec, train_days);
        if (!r.ok()) return r.status();
        round = *std::move(r);
      } else {
        NetworkRoundOptions net;
        net.round = index;
        net.timeout = std::chrono::milliseconds(c.network_timeout_ms);
        auto r = RunNetworkedRound(train, *key, spec, train_days, net);
        if (!r.ok()) return r.status();
        round = std::move(r->output);
      }
      o2o = round->o2o;
      assignment = round->assignment;
      out.stats.rejected = round->rejected;
    }

    if (round && c.strategy == Strategy::kIntersection) {
      pools = round->prefix_pools;
    } else if (round && c.strategy == Strategy::kIp2IpIntersection) {
      ShareOptions ip2ip = share;
      ip2ip.strategy = Strategy::kIp2Ip;
      auto rec = Share(ip2ip, assignment, o2o, train, train_days);
      if (!rec.ok()) return rec.status();
      for (OrgIndex i = 0; i < n; ++i) {
        pools[i] = MergePools(round->prefix_pools[i], (*rec)[i]);
      }
    } else {
      auto shared = Share(share, assignment, o2o, train, train_days);
      if (!shared.ok()) return shared.status();
      pools = *std::move(shared);
    }
  }

  if (UsesClusters(c.strategy)) {
    out.stats.avg_size = assignment.AverageSize();
    out.stats.collaborators = assignment.Collaborators();
  } else if (c.strategy == Strategy::kLocal) {
    out.stats.avg_size = 1;
  } else {
    auto partners = c.strategy == Strategy::kPairGlobal
                        ? PairGlobalPartners(o2o, c.pair_pct)
                        : PairLocalPartners(o2o, c.pair_x, c.pair_mutual);
    size_t members = 0;
    for (const auto& p : partners) {
      if (p.empty()) continue;
      ++out.stats.collaborators;
      members += p.size() + 1;
    }
    out.stats.avg_size = out.stats.collaborators == 0
                             ? 1
                             : static_cast<double>(members) / out.stats.collaborators;
  }

  PredictOptions predict{c.alpha, c.tau, c.signal};
  const OrgDataset nothing;
  for (OrgIndex i = 0; i < n; ++i) {
    const std::vector<Prefix24> test = window.test[i].prefixes();
    auto base = Predict(train[i], nothing, train_days, predict);
    if (!base.ok()) return base.status();
    auto collab = Predict(train[i], pools[i].ToDataset(train[i].org()), train_days,
                          predict);
    if (!collab.ok()) return collab.status();
    ResultRow row;
    row.window = index;
    row.org = train[i].org();
    if (i < assignment.size()) {
      if (assignment.mode == ClusterAssignment::Mode::kPartition) {
        row.label = assignment.label[i];
      }
      row.outlier = assignment.outlier[i];
    }
    row.baseline = Confuse(*base, test);
    row.collab = Confuse(*collab, test);
    row.quality = Derive(row.collab, row.baseline);
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::string F6(const std::optional<double>& v) {
  return v ? absl::StrFormat("%.6f", *v) : "";
}

std::string F4(const std::optional<double>& v) {
  return v ? absl::StrFormat("%.4f", *v) : "NA";
}

std::string MeanStd(const MetricSummary& m) {
  if (!m.mean) return "NA";
  return absl::StrFormat("%.4f±%.4f", *m.mean, m.stddev.value_or(0));
}

std::string TableRow(const ExperimentConfig& c, double avg_size, size_t collaborators,
                     const QualitySummary& s) {
  return absl::StrCat(Sv(ClusteringName(c.clustering)), ",", c.k, ",",
                      absl::StrFormat("%.2f", avg_size), ",", collaborators, ",",
                      F4(s.tpr.mean), ",", F4(s.ppv.mean), ",", MeanStd(s.tp_impr),
                      ",", MeanStd(s.fp_incr), ",", F4(s.fn_incr.mean), ",",
                      F4(s.f1.mean));
}

std::string ConfigColumns(const ExperimentConfig& c) {
  return absl::StrCat(Sv(StrategyName(c.strategy)), ",", Sv(ClusteringName(c.clustering)), ",",
                      c.k, ",", c.threshold_pct, ",", c.alpha, ",", c.tau, ",",
                      c.signal == SignalMode::kPresence ? "presence" : "count", ",",
                      c.heavy_hitters, ",", c.k_rec, ",", Sv(PrivacyModeName(c.privacy)),
                      ",", c.seed, ",", c.train_days, ",", c.test_days);
}

constexpr char kConfigHeader[] =
    "strategy,clustering,k,threshold_pct,alpha,tau,signal,heavy_hitters,k_rec,"
    "privacy,seed,train_days,test_days";

std::string SummaryColumns(const QualitySummary& s) {
  std::string out;
  for (const MetricSummary* m :
       {&s.tpr, &s.fpr, &s.ppv, &s.f1, &s.tp_impr, &s.fp_incr, &s.fn_incr}) {
    absl::StrAppend(&out, ",", F6(m->mean), ",", F6(m->stddev), ",", m->count, ",",
                    m->excluded);
  }
  return out;
}

std::string SummaryHeader() {
  std::string out;
  for (const char* m : {"tpr", "fpr", "ppv", "f1", "tp_impr", "fp_incr", "fn_incr"}) {
    absl::StrAppend(&out, ",", m, "_mean,", m, "_std,", m, "_n,", m, "_excluded");
  }
  return out;
}

absl::Status WriteFile(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) return absl::DataLossError(absl::StrCat("cannot write ", path.string()));
  body(out);
  out.flush();
  if (!out) return absl::DataLossError(absl::StrCat("cannot write ", path.string()));
  return absl::OkStatus();
}

absl::Status MakeDir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return absl::DataLossError(absl::StrCat("cannot create ", dir, ": ", ec.message()));
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<PreparedData> PrepareData(const ExperimentConfig& config) {
  if (absl::Status s = ValidateConfig(config); !s.ok()) return s;
  PreparedData data;
  if (config.data_path.empty()) {
    auto synth = SynthesizeLogs(config.synth, SubSeed(config.seed, "synth"));
    if (!synth.ok()) return synth.status();
    data.log = std::move(synth->log);
  } else {
    std::ifstream in(config.data_path);
    if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", config.data_path));
    if (config.data_format == DataFormat::kDShield) {
      data.log = ParseDShieldLog(in, config.separator, &data.parse_stats);
    } else {
      auto log = ReadEventFile(in);
      if (!log.ok()) return log.status();
      data.log = *std::move(log);
    }
  }
  auto range = DayRange(data.log);
  if (!range) return absl::DataLossError("the log holds no usable events");
  data.first_day = config.first_day != 0 ? config.first_day : range->first;
  data.num_days = config.num_days != 0 ? config.num_days
                                       : range->second - data.first_day + 1;
  auto ranking = SelectContributors(data.log, data.first_day, data.num_days);
  if (!ranking.ok()) return AsDataError(ranking.status(), "contributor selection");
  data.ranking = *std::move(ranking);
  data.orgs = data.ranking.selected;
  std::sort(data.orgs.begin(), data.orgs.end(), [&](OrgIndex a, OrgIndex b) {
    return data.log.orgs[a] < data.log.orgs[b];
  });
  auto windows = BuildWindows(data.log, data.orgs, data.first_day, data.num_days,
                              config.train_days, config.test_days);
  if (!windows.ok()) return AsDataError(windows.status(), "windowing");
  data.windows = *std::move(windows);
  return data;
}

double ExperimentResult::AverageSize() const {
  if (windows.empty()) return 0;
  double sum = 0;
  for (const WindowStats& w : windows) sum += w.avg_size;
  return sum / windows.size();
}

size_t ExperimentResult::Collaborators() const {
  size_t sum = 0;
  for (const WindowStats& w : windows) sum += w.collaborators;
  return sum;
}

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config,
                                               const PreparedData& data) {
  if (absl::Status s = ValidateConfig(config); !s.ok()) return s;
  const size_t num_windows = data.windows.size();
  std::vector<absl::StatusOr<WindowOutcome>> outcomes(
      num_windows, absl::UnknownError("not run"));

  // Each window writes only its own slot, so output order is fixed.
  auto work = [&](size_t w) { outcomes[w] = ProcessWindow(config, data.windows[w], w); };
  const size_t workers =
      config.privacy == PrivacyMode::kNetworked
          ? 1
          : std::min<size_t>(std::max(1u, std::thread::hardware_concurrency()),
                             num_windows);
  if (workers <= 1) {
    for (size_t w = 0; w < num_windows; ++w) work(w);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (size_t t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (size_t w = next++; w < num_windows; w = next++) work(w);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  ExperimentResult result;
  result.config = config;
  for (size_t w = 0; w < num_windows; ++w) {
    if (!outcomes[w].ok()) return WithWindow(outcomes[w].status(), w);
    result.windows.push_back(outcomes[w]->stats);
    for (ResultRow& row : outcomes[w]->rows) result.rows.push_back(std::move(row));
  }
  std::vector<QualityReport> reports;
  for (const ResultRow& r : result.rows) reports.push_back(r.quality);
  result.summary = Aggregate(reports);
  return result;
}

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config) {
  auto data = PrepareData(config);
  if (!data.ok()) return data.status();
  return RunExperiment(config, *data);
}

void WriteResultsCsv(std::span<const ExperimentResult> results, std::ostream& out) {
  out << kConfigHeader
      << ",window,org,label,outlier,base_tp,base_fp,base_fn,base_tn,tp,fp,fn,tn,"
         "unreachable,tpr,fpr,ppv,f1,tp_impr,fp_incr,fn_incr\n";
  for (const ExperimentResult& r : results) {
    const std::string cfg = ConfigColumns(r.config);
    for (const ResultRow& row : r.rows) {
      const QualityReport& q = row.quality;
      out << cfg << "," << row.window << "," << row.org << "," << row.label << ","
          << (row.outlier ? 1 : 0) << "," << row.baseline.tp << "," << row.baseline.fp
          << "," << row.baseline.fn << "," << row.baseline.tn << "," << row.collab.tp
          << "," << row.collab.fp << "," << row.collab.fn << "," << row.collab.tn << ","
          << row.collab.unreachable << "," << F6(q.tpr) << "," << F6(q.fpr) << ","
          << F6(q.ppv) << "," << F6(q.f1) << "," << F6(q.tp_impr) << ","
          << F6(q.fp_incr) << "," << F6(q.fn_incr) << "\n";
    }
  }
}

void WriteSummaryCsv(std::span<const ExperimentResult> results, std::ostream& out) {
  out << kConfigHeader << ",window,rows,avg_size,n_collab" << SummaryHeader() << "\n";
  for (const ExperimentResult& r : results) {
    const std::string cfg = ConfigColumns(r.config);
    out << cfg << ",all," << r.summary.rows << ","
        << absl::StrFormat("%.4f", r.AverageSize()) << "," << r.Collaborators()
        << SummaryColumns(r.summary) << "\n";
    if (!r.config.group_by_window) continue;
    for (const WindowStats& w : r.windows) {
      std::vector<QualityReport> reports;
      for (const ResultRow& row : r.rows) {
        if (row.window == w.window) reports.push_back(row.quality);
      }
      QualitySummary s = Aggregate(reports);
      out << cfg << "," << w.window << "," << s.rows << ","
          << absl::StrFormat("%.4f", w.avg_size) << "," << w.collaborators
          << SummaryColumns(s) << "\n";
    }
  }
}

void WriteTableCsv(std::span<const ExperimentResult> results, std::ostream& out) {
  for (size_t i = 0; i < kTableColumns.size(); ++i) {
    out << (i == 0 ? "" : ",") << kTableColumns[i];
  }
  out << "\n";
  for (const ExperimentResult& r : results) {
    out << TableRow(r.config, r.AverageSize(), r.Collaborators(), r.summary) << "\n";
  }
}

absl::Status WriteOutputs(std::span<const ExperimentResult> results,
                          const std::string& out_dir) {
  if (absl::Status s = MakeDir(out_dir); !s.ok()) return s;
  const std::filesystem::path dir(out_dir);
  if (absl::Status s = WriteFile(dir / "results.csv",
                                 [&](std::ostream& o) { WriteResultsCsv(results, o); });
      !s.ok()) {
    return s;
  }
  if (absl::Status s = WriteFile(dir / "summary.csv",
                                 [&](std::ostream& o) { WriteSummaryCsv(results, o); });
      !s.ok()) {
    return s;
  }
  std::map<std::string, std::vector<ExperimentResult>> by_strategy;
  for (const ExperimentResult& r : results) {
    by_strategy[std::string(StrategyName(r.config.strategy))].push_back(r);
  }
  for (const auto& [name, group] : by_strategy) {
    absl::Status s = WriteFile(dir / absl::StrCat("table_", name, ".csv"),
                               [&](std::ostream& o) { WriteTableCsv(group, o); });
    if (!s.ok()) return s;
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<SweepCell>> Sweep(const ExperimentConfig& base,
                                             const SweepGrid& grid) {
  if (grid.clusterings.empty() || grid.strategies.empty() || grid.ks.empty()) {
    return absl::InvalidArgumentError("sweep grid has an empty axis");
  }
  auto data = PrepareData(base);
  if (!data.ok()) return data.status();
  std::vector<SweepCell> cells;
  for (ClusteringAlgorithm clustering : grid.clusterings) {
    for (Strategy strategy : grid.strategies) {
      for (int k : grid.ks) {
        SweepCell cell;
        cell.config = base;
        cell.config.clustering = clustering;
        cell.config.strategy = strategy;
        cell.config.k = k;
        cell.degenerate = static_cast<size_t>(k) >= data->orgs.size();
        auto result = RunExperiment(cell.config, *data);
        if (result.ok()) {
          cell.result = *std::move(result);
        } else {
          cell.status = result.status();
          LOG(WARNING) << "sweep cell " << ClusteringName(clustering) << "/"
                       << StrategyName(strategy) << "/k=" << k << ": " << cell.status;
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

absl::Status WriteSweepOutputs(std::span<const SweepCell> cells,
                               const std::string& out_dir) {
  if (absl::Status s = MakeDir(out_dir); !s.ok()) return s;
  const std::filesystem::path dir(out_dir);
  absl::Status s = WriteFile(dir / "sweep_summary.csv", [&](std::ostream& o) {
    o << kConfigHeader << ",status,degenerate,rows,avg_size,n_collab" << SummaryHeader()
      << "\n";
    for (const SweepCell& c : cells) {
      o << ConfigColumns(c.config) << ",";
      if (c.result) {
        o << "ok," << (c.degenerate ? 1 : 0) << "," << c.result->summary.rows << ","
          << absl::StrFormat("%.4f", c.result->AverageSize()) << ","
          << c.result->Collaborators() << SummaryColumns(c.result->summary) << "\n";
      } else {
        std::string msg(c.status.message());
        std::replace(msg.begin(), msg.end(), ',', ';');
        o << "error: " << msg << "," << (c.degenerate ? 1 : 0) << ",0,,"
          << SummaryColumns(QualitySummary{}) << "\n";
      }
    }
  });
  if (!s.ok()) return s;
  std::map<std::string, std::vector<ExperimentResult>> by_strategy;
  for (const SweepCell& c : cells) {
    if (c.result) {
      by_strategy[std::string(StrategyName(c.config.strategy))].push_back(*c.result);
    }
  }
  for (const auto& [name, group] : by_strategy) {
    s = WriteFile(dir / absl::StrCat("table_", name, ".csv"),
                  [&](std::ostream& o) { WriteTableCsv(group, o); });
    if (!s.ok()) return s;
  }
  return absl::OkStatus();
}

int ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return 0;
    case absl::StatusCode::kInvalidArgument:
      return 1;
    case absl::StatusCode::kUnavailable:
    case absl::StatusCode::kDeadlineExceeded:
    case absl::StatusCode::kAborted:
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kAlreadyExists:
      return 3;
    default:
      return 2;
  }
}

}  // namespace cpb
