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

#ifndef WPFL_DATA_H_
#define WPFL_DATA_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "wpfl/models.h"
#include "wpfl/rng.h"

namespace wpfl {

using Dataset = Batch;

struct ClientDataset {
  Dataset train;
  Dataset test;
};

// Reads an IDX image file (magic 0x00000803) and label file (0x00000801),
// big-endian, gzip or plain. Pixels are scaled to [0, 1]. Throws ParseError on
// a wrong magic, truncation, or an image/label count mismatch.
Dataset LoadIdx(const std::string& image_path, const std::string& label_path,
                std::size_t max_samples = 0);

// Writes `images` (n x rows x cols bytes) and labels as uncompressed IDX.
void WriteIdx(const std::string& image_path, const std::string& label_path,
              const std::vector<std::uint8_t>& images,
              const std::vector<std::uint8_t>& labels, std::uint32_t rows,
              std::uint32_t cols);

struct SyntheticSpec {
  int n_classes = 10;
  std::size_t dim = 784;
  std::size_t n_samples = 2000;
  // Expected distance between class centers in units of the per-coordinate
  // noise std.
  double separation = 4.0;
  double noise_std = 1.0;
};

// Gaussian class clusters: centers are random directions of length
// separation / sqrt(2), labels are drawn uniformly.
Dataset SyntheticGen(const SyntheticSpec& spec, Rng& rng);

// Label-shard split: samples of each label are cut into equal single-label
// shards, n_clients * labels_per_client shards are dealt at random, and each
// client holds out `test_fraction` of its samples for testing. Every client
// gets the same number of samples. Throws ConfigError when shards would be
// empty.
std::vector<ClientDataset> PartitionNonIid(const Dataset& data, int n_clients,
                                           int labels_per_client,
                                           double test_fraction, Rng& rng);

// ceil(rate * n) distinct rows (at least one), drawn without replacement.
Batch SampleBatch(const Dataset& data, double rate, Rng& rng);

// Strongly convex task for bound checks: client n holds rows a_n + noise, and
// F_n(w) = mean 0.5 (w - x)^T A (w - x) with diagonal A in [a_min, a_max].
struct QuadraticTask {
  std::vector<ClientDataset> clients;
  std::vector<double> curvature;
  // Per-client mean of the training rows; F_n is minimized there.
  std::vector<ParamVector> train_means;
  // Minimizer of the equally weighted sum of client objectives.
  ParamVector fl_optimum;

  // argmin (1 - lambda/2) F_n(w) + (lambda/2) ||w - fl_optimum||^2.
  ParamVector PlOptimum(int client, double lambda) const;
};

struct QuadraticSpec {
  int n_clients = 20;
  std::size_t dim = 2;
  std::size_t rows_per_client = 50;
  double test_fraction = 0.2;
  double a_min = 0.5;
  double a_max = 1.2;
  // Client means are drawn uniformly in [-spread, spread] per coordinate.
  double spread = 0.5;
  double noise_std = 0.3;
};

QuadraticTask MakeQuadraticTask(const QuadraticSpec& spec, Rng& rng);

}  // namespace wpfl

#endif  // WPFL_DATA_H_
