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

// Command-line front end: calibrate, run, compare and sweep-t0.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "wpfl/config.h"
#include "wpfl/experiment.h"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string policy;
  std::string dp_mode;
  std::string out;
};

void AddCommon(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "INI or .json config file");
  cmd->add_option("--seed", f.seed, "Run a single seed instead of the list");
  cmd->add_option("--policy", f.policy,
                  "proposed | round_robin | random | non_adjustment");
  cmd->add_option("--dp-mode", f.dp_mode,
                  "quantization_assisted | plain_gaussian | none");
  cmd->add_option("--out", f.out, "Output directory");
}

wpfl::ExperimentConfig Resolve(const CommonFlags& f) {
  wpfl::ExperimentConfig cfg = f.config_path.empty()
                                   ? wpfl::ProfileDefaults("mlr")
                                   : wpfl::LoadConfig(f.config_path);
  if (f.seed) cfg.seeds = {*f.seed};
  if (!f.policy.empty()) {
    cfg.engine.policy = wpfl::ParsePolicy(f.policy);
    cfg.compare_policies = {cfg.engine.policy};
  }
  if (!f.dp_mode.empty()) cfg.engine.dp_mode = wpfl::ParseDpMode(f.dp_mode);
  if (!f.out.empty()) cfg.output = f.out;
  cfg.Validate();
  return cfg;
}

void PrintResults(const std::vector<wpfl::RunResult>& results) {
  std::printf("%-8s %-16s %-22s %7s %10s %12s %8s\n", "seed", "policy",
              "dp_mode", "rounds", "mean_acc", "max_test_ls", "jain");
  for (const auto& r : results) {
    std::printf("%-8llu %-16s %-22s %7zu %10.4f %12.4f %8.4f\n",
                static_cast<unsigned long long>(r.seed),
                wpfl::PolicyName(r.policy).c_str(),
                wpfl::DpModeName(r.dp_mode).c_str(), r.records.size(),
                r.FinalMeanAcc(), r.FinalMaxTestLoss(), r.FinalJain());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wireless personalized federated learning simulator"};
  app.require_subcommand(1);
  CommonFlags flags;
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "DP noise scale for each T0");
  CLI::App* run = app.add_subcommand("run", "Train with one policy");
  CLI::App* compare =
      app.add_subcommand("compare", "All policies on shared channel draws");
  CLI::App* sweep = app.add_subcommand("sweep-t0", "Accuracy against T0");
  for (CLI::App* cmd : {calibrate, run, compare, sweep}) AddCommon(cmd, flags);

  CLI11_PARSE(app, argc, argv);
  try {
    const wpfl::ExperimentConfig cfg = Resolve(flags);
    if (calibrate->parsed()) {
      const auto rows = wpfl::CmdCalibrate(cfg, cfg.output);
      std::cout << wpfl::CalibrationCsv(rows);
      for (const auto& r : rows)
        if (!r.error.empty()) return 3;
    } else if (run->parsed()) {
      PrintResults(wpfl::CmdRun(cfg, cfg.output));
    } else if (compare->parsed()) {
      PrintResults(wpfl::CmdCompare(cfg, cfg.output));
    } else if (sweep->parsed()) {
      PrintResults(wpfl::CmdSweepT0(cfg, cfg.output));
    }
  } catch (const wpfl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const wpfl::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
