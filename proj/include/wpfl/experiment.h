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

#ifndef WPFL_EXPERIMENT_H_
#define WPFL_EXPERIMENT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wpfl/config.h"
#include "wpfl/engine.h"

namespace wpfl {

// Loads or generates the dataset and partitions it across clients; the
// randomness depends only on the seed. Also fixes the model input dimension
// and class count in `cfg`.
std::vector<ClientDataset> BuildClients(ExperimentConfig& cfg,
                                        std::uint64_t seed);

struct RunResult {
  std::uint64_t seed = 0;
  Policy policy = Policy::kProposed;
  DpMode dp_mode = DpMode::kQuantizationAssisted;
  double sigma_dp = 0.0;
  BoundConstants consts;
  std::vector<RoundRecord> records;

  double FinalMeanAcc() const;
  double FinalMaxTestLoss() const;
  double FinalJain() const;
  // Order-sensitive hash of the per-round channel digests.
  std::uint64_t ChannelFingerprint() const;
};

RunResult RunOne(const ExperimentConfig& cfg, std::uint64_t seed);

inline const char kRoundCsvHeader[] =
    "round,policy,dp_mode,seed,mean_acc,max_test_loss,jain,theta_l,phi_max,"
    "selected_count,mean_train_loss,eta_f,mean_eta_p,mean_lambda,gamma_next,"
    "fl_bound,pl_bound,channel_digest";

std::string RoundCsv(const RunResult& r);

struct CalibrationRow {
  int t0 = 0;
  std::optional<double> sigma;
  std::optional<double> delta;
  std::string error;
};

std::vector<CalibrationRow> Calibrate(const PrivacySpec& base,
                                      const std::vector<int>& t0_list);
std::string CalibrationCsv(const std::vector<CalibrationRow>& rows);

// One CSV per seed plus summary.json in `out_dir`. Returns the results.
std::vector<RunResult> CmdRun(ExperimentConfig cfg, const std::string& out_dir);

// Every policy in cfg.compare_policies on every seed with shared channel
// draws; writes compare.csv and throws StateError if the channel fingerprints
// of a seed differ between policies.
std::vector<RunResult> CmdCompare(ExperimentConfig cfg,
                                  const std::string& out_dir);

// The configured policy for each T0 in cfg.t0_list and each seed; writes
// sweep_t0.csv.
std::vector<RunResult> CmdSweepT0(ExperimentConfig cfg,
                                  const std::string& out_dir);

// Writes calibration.csv.
std::vector<CalibrationRow> CmdCalibrate(const ExperimentConfig& cfg,
                                         const std::string& out_dir);

}  // namespace wpfl

#endif  // WPFL_EXPERIMENT_H_
