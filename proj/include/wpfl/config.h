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

#ifndef WPFL_CONFIG_H_
#define WPFL_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "wpfl/data.h"
#include "wpfl/engine.h"

namespace wpfl {

enum class DataSource { kSynthetic, kIdx };

struct DataConfig {
  DataSource source = DataSource::kSynthetic;
  std::string idx_images;
  std::string idx_labels;
  // 0 keeps every sample of the IDX files.
  std::size_t max_samples = 2000;
  SyntheticSpec synthetic;
  int labels_per_client = 2;
  double test_fraction = 0.2;
};

struct ExperimentConfig {
  std::string profile = "mlr";
  DataConfig data;
  EngineConfig engine;
  std::vector<std::uint64_t> seeds = {1};
  std::vector<Policy> compare_policies = {Policy::kProposed, Policy::kRoundRobin,
                                          Policy::kRandom,
                                          Policy::kNonAdjustment};
  std::vector<int> t0_list = {5, 10, 15, 20, 25, 30};
  std::string output = "out";

  void Validate() const;
};

// Model, clipping threshold, latency budget, target delta and curvature of
// the "mlr" or "mlp" profile, on top of the radio defaults.
ExperimentConfig ProfileDefaults(const std::string& profile);

// Sectioned key-value text: [experiment], [data], [model], [privacy],
// [radio], [learning]. Unknown keys are rejected. Missing keys take the
// profile defaults.
ExperimentConfig ParseConfigIni(const std::string& text);
ExperimentConfig ParseConfigJson(const std::string& text);
// Dispatches on the extension: .json is JSON, anything else the INI form.
ExperimentConfig LoadConfig(const std::string& path);

// Every field, written so that parsing it back yields the same config.
std::string SerializeConfigIni(const ExperimentConfig& cfg);
std::string SerializeConfigJson(const ExperimentConfig& cfg);

}  // namespace wpfl

#endif  // WPFL_CONFIG_H_
