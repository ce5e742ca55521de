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

// Command-line entry point for the collaborative blacklisting pipeline.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "cpb/bench.h"
#include "cpb/config.h"
#include "cpb/experiment.h"
#include "cpb/ingest.h"
#include "cpb/org_client.h"
#include "cpb/sta_server.h"
#include "cpb/strings.h"
#include "cpb/synth.h"
#include "glog/logging.h"

namespace cpb {
namespace {

namespace fs = std::filesystem;

struct Flags {
  std::string config;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = "out";

  std::string input;
  std::string separator = "tab";
  std::string first_day;
  int num_days = 0;

  std::string ks = "1,5,10,15,20,25,30,35";
  std::string strategies = "local,global,intersection,ip2ip,ip2ip+intersection";
  std::string clusterings = "kmeans,knn,agglomerative";

  std::string orgs;
  size_t set_size = 4000;

  std::string listen = "0.0.0.0:7700";
  std::string sta;
  double timeout_s = 60;
  std::string clustering = "kmeans";
  int k = 5;
  double threshold_pct = kDefaultThresholdPct;
  uint64_t round_seed = 0;
  uint64_t round = 0;
  std::string transcript;

  std::string data;
  std::string org;
  std::string key_file;
  std::string key_from;
  int train_days = 5;
  size_t peers = 0;
};

absl::StatusOr<ExperimentConfig> BaseConfig(const Flags& f) {
  ExperimentConfig c;
  if (!f.config.empty()) {
    auto loaded = LoadConfig(f.config);
    if (!loaded.ok()) return loaded.status();
    c = *loaded;
  }
  if (f.seed_set) c.seed = f.seed;
  if (absl::Status s = ValidateConfig(c); !s.ok()) return s;
  return c;
}

absl::StatusOr<std::vector<int>> ParseInts(std::string_view text) {
  std::vector<int> out;
  for (absl::string_view part : absl::StrSplit(Sv(text), ',', absl::SkipEmpty())) {
    int v;
    if (!absl::SimpleAtoi(part, &v)) {
      return absl::InvalidArgumentError(absl::StrCat("bad integer '", part, "'"));
    }
    out.push_back(v);
  }
  return out;
}

absl::StatusOr<char> ParseSeparator(const std::string& s) {
  if (s == "tab") return '\t';
  if (s == "comma") return ',';
  if (s.size() == 1) return s[0];
  return absl::InvalidArgumentError(absl::StrCat("bad separator '", s, "'"));
}

absl::Status EnsureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) return absl::DataLossError(absl::StrCat("cannot create ", dir));
  return absl::OkStatus();
}

absl::Status CmdIngest(const Flags& f) {
  auto sep = ParseSeparator(f.separator);
  if (!sep.ok()) return sep.status();
  std::ifstream in(f.input);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", f.input));
  ParseStats stats;
  EventLog log = ParseDShieldLog(in, *sep, &stats);
  std::cerr << "lines=" << stats.lines << " events=" << stats.events
            << " skipped=" << stats.skipped << " errors=" << stats.errors << "\n";
  for (const std::string& e : stats.sample_errors) std::cerr << "  " << e << "\n";
  auto range = DayRange(log);
  if (!range) return absl::DataLossError("no usable events");
  Day first = range->first;
  if (!f.first_day.empty()) {
    auto d = ParseDay(f.first_day);
    if (!d) return absl::InvalidArgumentError("bad --first-day");
    first = *d;
  }
  int days = f.num_days > 0 ? f.num_days : range->second - first + 1;
  auto ranking = SelectContributors(log, first, days);
  if (!ranking.ok()) return absl::DataLossError(ranking.status().message());
  if (absl::Status s = EnsureDir(f.out_dir); !s.ok()) return s;
  std::ofstream events(fs::path(f.out_dir) / "events.csv");
  WriteEventFile(log, events);
  std::ofstream sel(fs::path(f.out_dir) / "contributors.csv");
  sel << "rank,org,selected\n";
  std::vector<OrgIndex> chosen = ranking->selected;
  std::sort(chosen.begin(), chosen.end());
  for (size_t r = 0; r < ranking->daily_reporters.size(); ++r) {
    OrgIndex o = ranking->daily_reporters[r];
    sel << r + 1 << "," << log.orgs[o] << ","
        << (std::binary_search(chosen.begin(), chosen.end(), o) ? 1 : 0) << "\n";
  }
  std::cout << "days " << FormatDay(first) << " +" << days << ", "
            << ranking->daily_reporters.size() << " daily reporters, "
            << ranking->selected.size() << " selected\n";
  if (!events || !sel) return absl::DataLossError("cannot write ingest outputs");
  return absl::OkStatus();
}

absl::Status CmdSynth(const Flags& f) {
  auto c = BaseConfig(f);
  if (!c.ok()) return c.status();
  auto synth = SynthesizeLogs(c->synth, SubSeed(c->seed, "synth"));
  if (!synth.ok()) return synth.status();
  if (absl::Status s = EnsureDir(f.out_dir); !s.ok()) return s;
  std::ofstream dshield(fs::path(f.out_dir) / "dshield.tsv");
  WriteDShieldLog(synth->log, dshield, SubSeed(c->seed, "render"));
  std::ofstream events(fs::path(f.out_dir) / "events.csv");
  WriteEventFile(synth->log, events);
  std::ofstream truth(fs::path(f.out_dir) / "truth.csv");
  truth << "org,victim_cluster,daily_reporter\n";
  for (size_t o = 0; o < synth->log.orgs.size(); ++o) {
    truth << synth->log.orgs[o] << "," << synth->truth.victim_cluster[o] << ","
          << (synth->truth.daily_reporter[o] ? 1 : 0) << "\n";
  }
  std::cout << synth->log.events.size() << " events for " << synth->log.orgs.size()
            << " orgs written to " << f.out_dir << "\n";
  if (!dshield || !events || !truth) return absl::DataLossError("cannot write synth outputs");
  return absl::OkStatus();
}

absl::Status CmdRun(const Flags& f) {
  auto c = BaseConfig(f);
  if (!c.ok()) return c.status();
  auto result = RunExperiment(*c);
  if (!result.ok()) return result.status();
  std::vector<ExperimentResult> results{*std::move(result)};
  if (absl::Status s = WriteOutputs(results, f.out_dir); !s.ok()) return s;
  std::ofstream(fs::path(f.out_dir) / "config.txt") << SerializeConfig(*c);
  WriteTableCsv(results, std::cout);
  return absl::OkStatus();
}

absl::Status CmdSweep(const Flags& f) {
  auto c = BaseConfig(f);
  if (!c.ok()) return c.status();
  SweepGrid grid;
  auto ks = ParseInts(f.ks);
  if (!ks.ok()) return ks.status();
  grid.ks = *ks;
  for (absl::string_view s : absl::StrSplit(f.strategies, ',', absl::SkipEmpty())) {
    auto strategy = ParseStrategy(Sv(s));
    if (!strategy.ok()) return strategy.status();
    grid.strategies.push_back(*strategy);
  }
  for (absl::string_view s : absl::StrSplit(f.clusterings, ',', absl::SkipEmpty())) {
    auto a = ParseClustering(Sv(s));
    if (!a.ok()) return a.status();
    grid.clusterings.push_back(*a);
  }
  auto cells = Sweep(*c, grid);
  if (!cells.ok()) return cells.status();
  if (absl::Status s = WriteSweepOutputs(*cells, f.out_dir); !s.ok()) return s;
  size_t failed = 0;
  for (const SweepCell& cell : *cells) failed += cell.result ? 0 : 1;
  std::cout << cells->size() << " cells, " << failed << " failed\n";
  return absl::OkStatus();
}

absl::Status CmdBench(const Flags& f) {
  auto ns = ParseInts(f.orgs.empty() ? "10,20,40,100" : f.orgs);
  if (!ns.ok()) return ns.status();
  std::vector<BenchReport> reports;
  for (int n : *ns) {
    BenchOptions o;
    o.num_orgs = static_cast<size_t>(n);
    o.set_size = f.set_size;
    o.seed = f.seed_set ? f.seed : 1;
    auto r = BenchProtocol(o);
    if (!r.ok()) return r.status();
    reports.push_back(*std::move(r));
  }
  WriteBenchCsv(reports, std::cout);
  if (absl::Status s = EnsureDir(f.out_dir); !s.ok()) return s;
  std::ofstream out(fs::path(f.out_dir) / "bench.csv");
  WriteBenchCsv(reports, out);
  return absl::OkStatus();
}

absl::Status CmdServeSta(const Flags& f) {
  StaConfig config;
  config.listen = f.listen;
  int count = 0;
  if (absl::SimpleAtoi(f.orgs, &count)) {
    config.expected_orgs = static_cast<size_t>(count);
  } else {
    for (absl::string_view name : absl::StrSplit(f.orgs, ',', absl::SkipEmpty())) {
      config.org_names.emplace_back(name);
    }
    config.expected_orgs = config.org_names.size();
  }
  if (config.expected_orgs < 2) {
    return absl::InvalidArgumentError("--orgs needs a count or names of >= 2 orgs");
  }
  auto algorithm = ParseClustering(f.clustering);
  if (!algorithm.ok()) return algorithm.status();
  config.clustering = {*algorithm, f.k, f.threshold_pct, f.round_seed};
  config.round = f.round;
  config.timeout = std::chrono::milliseconds(static_cast<int64_t>(f.timeout_s * 1000));
  config.transcript_path = f.transcript;
  auto server = StaServer::Bind(config);
  if (!server.ok()) return server.status();
  std::cerr << "STA listening on port " << (*server)->port() << "\n";
  auto result = (*server)->ServeRound();
  if (!result.ok()) return result.status();
  std::cout << "round " << f.round << ": " << RoundPhaseName(result->phase) << ", "
            << result->uploads << " uploads\n";
  if (result->phase != RoundPhase::kDelivered) {
    return absl::AbortedError(absl::StrCat("round aborted: ", result->error));
  }
  if (absl::Status s = EnsureDir(f.out_dir); !s.ok()) return s;
  std::ofstream o2o(fs::path(f.out_dir) / "o2o.csv");
  for (size_t i = 0; i < result->orgs.size(); ++i) {
    o2o << result->orgs[i];
    for (uint64_t v : result->o2o.row(i)) o2o << "," << v;
    o2o << "\n";
  }
  return absl::OkStatus();
}

absl::StatusOr<SharedKey> LoadKey(const Flags& f) {
  if (!f.key_file.empty()) {
    std::ifstream in(f.key_file);
    std::string hex;
    if (!(in >> hex)) return absl::InvalidArgumentError("cannot read --key-file");
    return SharedKey::FromHex(hex);
  }
  if (!f.key_from.empty()) {
    auto key = FetchKeyOffer(f.key_from, std::chrono::milliseconds(
                                             static_cast<int64_t>(f.timeout_s * 1000)));
    if (!key.ok()) return absl::UnavailableError(key.status().message());
    return key;
  }
  return absl::InvalidArgumentError("need --key-file or --key-from");
}

absl::Status CmdRunOrg(const Flags& f) {
  if (f.org.empty() || f.data.empty() || f.sta.empty()) {
    return absl::InvalidArgumentError("run-org needs --org, --data and --sta");
  }
  auto key = LoadKey(f);
  if (!key.ok()) return key.status();
  std::ifstream in(f.data);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", f.data));
  auto log = ReadEventFile(in);
  if (!log.ok()) return log.status();
  auto org = log->Find(f.org);
  auto range = DayRange(*log);
  if (!range) return absl::DataLossError("event file is empty");
  Day first = range->first;
  if (!f.first_day.empty()) {
    auto d = ParseDay(f.first_day);
    if (!d) return absl::InvalidArgumentError("bad --first-day");
    first = *d;
  }
  std::vector<Day> train_days;
  for (int d = 0; d < f.train_days; ++d) train_days.push_back(first + d);
  std::vector<ElementCount> entries;
  if (org) {
    for (const AlertEvent& e : log->events) {
      if (e.org == *org && e.day >= first && e.day < first + f.train_days) {
        entries.push_back({{e.attacker, e.day}, 1});
      }
    }
  }
  OrgDataset dataset = OrgDataset::FromElements(f.org, std::move(entries));

  OrgClientConfig config;
  config.sta_address = f.sta;
  config.round = f.round;
  config.timeout = std::chrono::milliseconds(static_cast<int64_t>(f.timeout_s * 1000));
  auto outcome = RunOrg(config, dataset, *key, train_days);
  if (!outcome.ok()) return outcome.status();
  if (outcome->aborted) {
    return absl::AbortedError(absl::StrCat("round aborted: ", outcome->abort_reason));
  }
  if (absl::Status s = EnsureDir(f.out_dir); !s.ok()) return s;
  std::ofstream pool(fs::path(f.out_dir) / absl::StrCat("pool_", f.org, ".csv"));
  pool << "section,source,prefix,day,count\n";
  for (const auto* p : {&outcome->element_pool, &outcome->prefix_pool}) {
    const char* section = p == &outcome->element_pool ? "element" : "prefix";
    for (const PoolEntry& e : p->entries) {
      pool << section << "," << outcome->orgs[e.source] << "," << e.prefix.ToString()
           << "," << FormatDay(e.day) << "," << e.count << "\n";
    }
  }
  std::cout << f.org << ": cluster " << outcome->label
            << (outcome->outlier ? " (outlier)" : "") << ", " << outcome->peers.size()
            << " peers, " << outcome->element_pool.entries.size() << " element and "
            << outcome->prefix_pool.entries.size() << " prefix pool entries, "
            << outcome->rejected << " rejected\n";
  return absl::OkStatus();
}

absl::Status CmdKeygen(const Flags& f) {
  auto key = GenerateSharedKey();
  if (!key.ok()) return key.status();
  if (f.key_file.empty()) return absl::InvalidArgumentError("keygen needs --key-file");
  std::ofstream out(f.key_file);
  out << key->ToHex() << "\n";
  if (!out) return absl::DataLossError("cannot write key file");
  return absl::OkStatus();
}

absl::Status CmdOfferKey(const Flags& f) {
  auto key = LoadKey(f);
  if (!key.ok()) return key.status();
  auto listener = Listener::Bind(f.listen);
  if (!listener.ok()) return listener.status();
  std::cerr << "offering key on port " << listener->port() << "\n";
  return ServeKeyOffer(*listener, *key, f.peers,
                       std::chrono::milliseconds(static_cast<int64_t>(f.timeout_s * 1000)));
}

}  // namespace
}  // namespace cpb

int main(int argc, char** argv) {
  google::InitGoogleLogging(argv[0]);
  FLAGS_logtostderr = true;
  cpb::Flags f;
  CLI::App app{"Collaborative predictive blacklisting toolkit"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", f.config, "key=value experiment config");
    cmd->add_option_function<uint64_t>(
        "--seed", [&](uint64_t s) { f.seed = s, f.seed_set = true; }, "master seed");
    cmd->add_option("--out-dir", f.out_dir, "output directory");
  };

  CLI::App* ingest = app.add_subcommand("ingest", "parse a DShield log and select contributors");
  add_common(ingest);
  ingest->add_option("--input", f.input, "DShield log")->required();
  ingest->add_option("--separator", f.separator, "tab, comma or one character");
  ingest->add_option("--first-day", f.first_day, "YYYY-MM-DD");
  ingest->add_option("--num-days", f.num_days);

  CLI::App* synth = app.add_subcommand("synth", "write a planted synthetic log");
  add_common(synth);

  CLI::App* run = app.add_subcommand("run", "run one experiment");
  add_common(run);

  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter grid");
  add_common(sweep);
  sweep->add_option("--ks", f.ks, "comma-separated k values");
  sweep->add_option("--strategies", f.strategies);
  sweep->add_option("--clusterings", f.clusterings);

  CLI::App* bench = app.add_subcommand("bench", "protocol cost benchmark");
  add_common(bench);
  bench->add_option("--orgs", f.orgs, "comma-separated org counts");
  bench->add_option("--set-size", f.set_size);

  CLI::App* serve = app.add_subcommand("serve-sta", "run one STA round");
  add_common(serve);
  serve->add_option("--listen", f.listen, "host:port");
  serve->add_option("--orgs", f.orgs, "org count or comma-separated names")->required();
  serve->add_option("--timeout", f.timeout_s, "seconds");
  serve->add_option("--clustering", f.clustering);
  serve->add_option("--k", f.k);
  serve->add_option("--threshold-pct", f.threshold_pct);
  serve->add_option("--round-seed", f.round_seed);
  serve->add_option("--round", f.round);
  serve->add_option("--transcript", f.transcript, "append received frames as hex");

  CLI::App* run_org = app.add_subcommand("run-org", "take part in one STA round");
  add_common(run_org);
  run_org->add_option("--sta", f.sta, "host:port");
  run_org->add_option("--data", f.data, "event file (org,prefix,day)");
  run_org->add_option("--org", f.org);
  run_org->add_option("--key-file", f.key_file);
  run_org->add_option("--key-from", f.key_from, "host:port of a key offer");
  run_org->add_option("--first-day", f.first_day, "first train day, YYYY-MM-DD");
  run_org->add_option("--train-days", f.train_days);
  run_org->add_option("--round", f.round);
  run_org->add_option("--timeout", f.timeout_s, "seconds");

  CLI::App* keygen = app.add_subcommand("keygen", "write a fresh shared key");
  keygen->add_option("--key-file", f.key_file)->required();

  CLI::App* offer = app.add_subcommand("offer-key", "serve the shared key to peers");
  offer->add_option("--listen", f.listen);
  offer->add_option("--key-file", f.key_file)->required();
  offer->add_option("--peers", f.peers)->required();
  offer->add_option("--timeout", f.timeout_s, "seconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  absl::Status status;
  if (*ingest) status = cpb::CmdIngest(f);
  if (*synth) status = cpb::CmdSynth(f);
  if (*run) status = cpb::CmdRun(f);
  if (*sweep) status = cpb::CmdSweep(f);
  if (*bench) status = cpb::CmdBench(f);
  if (*serve) status = cpb::CmdServeSta(f);
  if (*run_org) status = cpb::CmdRunOrg(f);
  if (*keygen) status = cpb::CmdKeygen(f);
  if (*offer) status = cpb::CmdOfferKey(f);
  if (!status.ok()) {
    std::cerr << "error: " << status << "\n";
    return cpb::ExitCodeFor(status);
  }
  return 0;
}
