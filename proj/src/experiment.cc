//
// Copyright 2026 The WPFL Simulator Authors
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
//

#include "wpfl/experiment.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace wpfl {
namespace {

std::string Fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

// JSON numbers cannot be NaN; null stands in.
nlohmann::json Num(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json Summary(const RunResult& r) {
  nlohmann::json j;
  j["seed"] = r.seed;
  j["policy"] = PolicyName(r.policy);
  j["dp_mode"] = DpModeName(r.dp_mode);
  j["sigma_dp"] = r.sigma_dp;
  j["rounds"] = r.records.size();
  j["final_mean_acc"] = Num(r.FinalMeanAcc());
  j["final_max_test_loss"] = Num(r.FinalMaxTestLoss());
  j["final_jain"] = Num(r.FinalJain());
  j["mu"] = r.consts.mu;
  j["lsmooth"] = r.consts.lsmooth;
  j["g0"] = r.consts.g0;
  j["m_dist"] = r.consts.m_dist;
  nlohmann::json fl = nlohmann::json::array();
  nlohmann::json pl = nlohmann::json::array();
  for (const auto& rec : r.records) {
    fl.push_back(Num(rec.fl_bound));
    pl.push_back(Num(rec.pl_bound));
  }
  j["fl_bound"] = fl;
  j["pl_bound"] = pl;
  return j;
}

}  // namespace

std::vector<ClientDataset> BuildClients(ExperimentConfig& cfg,
                                        std::uint64_t seed) {
  Dataset data;
  if (cfg.data.source == DataSource::kIdx) {
    data = LoadIdx(cfg.data.idx_images, cfg.data.idx_labels,
                   cfg.data.max_samples);
  } else {
    Rng rng = MakeRng(seed, Stream::kSynthetic);
    data = SyntheticGen(cfg.data.synthetic, rng);
  }
  cfg.engine.model.input_dim = data.dim;
  cfg.engine.model.n_classes = data.n_classes;
  Rng part = MakeRng(seed, Stream::kPartition);
  return PartitionNonIid(data, cfg.engine.radio.n_clients,
                         cfg.data.labels_per_client, cfg.data.test_fraction,
                         part);
}

double RunResult::FinalMeanAcc() const {
  return records.empty() ? std::nan("") : records.back().mean_acc;
}
double RunResult::FinalMaxTestLoss() const {
  return records.empty() ? std::nan("") : records.back().max_test_loss;
}
double RunResult::FinalJain() const {
  return records.empty() ? std::nan("") : records.back().jain;
}

std::uint64_t RunResult::ChannelFingerprint() const {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (const auto& rec : records) h = SplitMix64(h ^ rec.channel_digest);
  return h;
}

RunResult RunOne(const ExperimentConfig& cfg_in, std::uint64_t seed) {
  ExperimentConfig cfg = cfg_in;
  std::vector<ClientDataset> clients = BuildClients(cfg, seed);
  Simulator sim(cfg.engine, std::move(clients), seed);
  RunResult r;
  r.seed = seed;
  r.policy = cfg.engine.policy;
  r.dp_mode = cfg.engine.dp_mode;
  r.sigma_dp = sim.sigma_dp();
  r.consts = sim.bound_constants();
  r.records = sim.Run();
  return r;
}

std::string RoundCsv(const RunResult& r) {
  std::ostringstream out;
  out << kRoundCsvHeader << "\n";
  for (const auto& rec : r.records) {
    out << rec.round << "," << PolicyName(r.policy) << ","
        << DpModeName(r.dp_mode) << "," << r.seed << "," << Fmt(rec.mean_acc)
        << "," << Fmt(rec.max_test_loss) << "," << Fmt(rec.jain) << ","
        << Fmt(rec.theta_l) << "," << Fmt(rec.phi_max) << ","
        << rec.selected.size() << "," << Fmt(rec.mean_train_loss) << ","
        << Fmt(rec.eta_f) << "," << Fmt(Mean(rec.eta_p)) << ","
        << Fmt(Mean(rec.lambda)) << "," << Fmt(rec.gamma_next) << ","
        << Fmt(rec.fl_bound) << "," << Fmt(rec.pl_bound) << ","
        << rec.channel_digest << "\n";
  }
  return out.str();
}

std::vector<CalibrationRow> Calibrate(const PrivacySpec& base,
                                      const std::vector<int>& t0_list) {
  std::vector<CalibrationRow> rows;
  for (int t0 : t0_list) {
    CalibrationRow row;
    row.t0 = t0;
    PrivacySpec spec = base;
    spec.t0 = t0;
    spec.sigma_dp.reset();
    try {
      row.sigma = SearchSigma(spec);
      row.delta = DeltaQOfSigma(spec, *row.sigma);
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

std::string CalibrationCsv(const std::vector<CalibrationRow>& rows) {
  std::ostringstream out;
  out << "t0,sigma_dp,delta_q,status\n";
  for (const auto& r : rows) {
    out << r.t0 << "," << (r.sigma ? Fmt(*r.sigma) : "") << ","
        << (r.delta ? Fmt(*r.delta) : "") << ","
        << (r.error.empty() ? "ok" : "infeasible: " + r.error) << "\n";
  }
  return out.str();
}

std::vector<CalibrationRow> CmdCalibrate(const ExperimentConfig& cfg,
                                         const std::string& out_dir) {
  std::vector<CalibrationRow> rows = Calibrate(cfg.engine.privacy, cfg.t0_list);
  WriteFile(std::filesystem::path(out_dir) / "calibration.csv",
            CalibrationCsv(rows));
  return rows;
}

std::vector<RunResult> CmdRun(ExperimentConfig cfg, const std::string& out_dir) {
  const std::filesystem::path dir(out_dir);
  std::vector<RunResult> results;
  nlohmann::json runs = nlohmann::json::array();
  double acc = 0, loss = 0, jain = 0;
  for (std::uint64_t seed : cfg.seeds) {
    RunResult r = RunOne(cfg, seed);
    WriteFile(dir / ("rounds_" + PolicyName(r.policy) + "_" +
                     DpModeName(r.dp_mode) + "_seed" + std::to_string(seed) +
                     ".csv"),
              RoundCsv(r));
    runs.push_back(Summary(r));
    acc += r.FinalMeanAcc();
    loss += r.FinalMaxTestLoss();
    jain += r.FinalJain();
    results.push_back(std::move(r));
  }
  const double n = static_cast<double>(results.size());
  nlohmann::json summary;
  summary["policy"] = PolicyName(cfg.engine.policy);
  summary["dp_mode"] = DpModeName(cfg.engine.dp_mode);
  summary["seeds"] = cfg.seeds;
  summary["mean_final_acc"] = Num(acc / n);
  summary["mean_final_max_test_loss"] = Num(loss / n);
  summary["mean_final_jain"] = Num(jain / n);
  summary["runs"] = runs;
  WriteFile(dir / "summary.json", summary.dump(2) + "\n");
  return results;
}

std::vector<RunResult> CmdCompare(ExperimentConfig cfg,
                                  const std::string& out_dir) {
  std::vector<RunResult> results;
  std::ostringstream csv;
  csv << "seed,policy,dp_mode,rounds,final_mean_acc,final_max_test_loss,"
         "final_jain,channel_fingerprint\n";
  for (std::uint64_t seed : cfg.seeds) {
    for (Policy p : cfg.compare_policies) {
      cfg.engine.policy = p;
      RunResult r = RunOne(cfg, seed);
      // Runs can stop at different rounds; compare the common prefix.
      if (!results.empty() && results.back().seed == seed) {
        const RunResult& ref = results.back();
        const std::size_t common = std::min(ref.records.size(), r.records.size());
        for (std::size_t i = 0; i < common; ++i)
          if (ref.records[i].channel_digest != r.records[i].channel_digest)
            throw StateError("channel draws differ between policies for seed " +
                             std::to_string(seed));
      }
      csv << seed << "," << PolicyName(p) << "," << DpModeName(r.dp_mode)
          << "," << r.records.size() << "," << Fmt(r.FinalMeanAcc()) << ","
          << Fmt(r.FinalMaxTestLoss()) << "," << Fmt(r.FinalJain()) << ","
          << r.ChannelFingerprint() << "\n";
      results.push_back(std::move(r));
    }
  }
  WriteFile(std::filesystem::path(out_dir) / "compare.csv", csv.str());
  return results;
}

std::vector<RunResult> CmdSweepT0(ExperimentConfig cfg,
                                  const std::string& out_dir) {
  std::vector<RunResult> results;
  std::ostringstream csv;
  csv << "t0,seed,policy,dp_mode,sigma_dp,rounds,final_mean_acc,"
         "final_max_test_loss,final_jain\n";
  for (int t0 : cfg.t0_list) {
    cfg.engine.privacy.t0 = t0;
    cfg.engine.privacy.sigma_dp.reset();
    for (std::uint64_t seed : cfg.seeds) {
      RunResult r = RunOne(cfg, seed);
      csv << t0 << "," << seed << "," << PolicyName(r.policy) << ","
          << DpModeName(r.dp_mode) << "," << Fmt(r.sigma_dp) << ","
          << r.records.size() << "," << Fmt(r.FinalMeanAcc()) << ","
          << Fmt(r.FinalMaxTestLoss()) << "," << Fmt(r.FinalJain()) << "\n";
      results.push_back(std::move(r));
    }
  }
  WriteFile(std::filesystem::path(out_dir) / "sweep_t0.csv", csv.str());
  return results;
}

}  // namespace wpfl
