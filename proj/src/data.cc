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

#include "wpfl/data.h"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>

namespace wpfl {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

struct GzCloser {
  void operator()(gzFile f) const { gzclose(f); }
};
using GzHandle = std::unique_ptr<std::remove_pointer_t<gzFile>, GzCloser>;

// gzread passes plain files through unchanged.
std::vector<std::uint8_t> ReadAll(const std::string& path) {
  GzHandle f(gzopen(path.c_str(), "rb"));
  if (!f) throw ParseError("cannot open " + path);
  std::vector<std::uint8_t> out;
  std::uint8_t buf[1 << 16];
  int n;
  while ((n = gzread(f.get(), buf, sizeof buf)) > 0)
    out.insert(out.end(), buf, buf + n);
  if (n < 0) throw ParseError("read error in " + path);
  return out;
}

std::uint32_t BigEndian32(const std::vector<std::uint8_t>& b, std::size_t at,
                          const std::string& path) {
  if (at + 4 > b.size()) throw ParseError("truncated IDX header in " + path);
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

void PutBigEndian32(std::ofstream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(bytes, 4);
}

}  // namespace

Dataset LoadIdx(const std::string& image_path, const std::string& label_path,
                std::size_t max_samples) {
  const std::vector<std::uint8_t> img = ReadAll(image_path);
  const std::vector<std::uint8_t> lab = ReadAll(label_path);
  if (BigEndian32(img, 0, image_path) != kImageMagic)
    throw ParseError("bad image magic in " + image_path);
  if (BigEndian32(lab, 0, label_path) != kLabelMagic)
    throw ParseError("bad label magic in " + label_path);
  const std::size_t n_img = BigEndian32(img, 4, image_path);
  const std::size_t rows = BigEndian32(img, 8, image_path);
  const std::size_t cols = BigEndian32(img, 12, image_path);
  const std::size_t n_lab = BigEndian32(lab, 4, label_path);
  if (n_img != n_lab)
    throw ParseError("image count " + std::to_string(n_img) +
                     " != label count " + std::to_string(n_lab));
  const std::size_t dim = rows * cols;
  if (img.size() < 16 + n_img * dim)
    throw ParseError("truncated image payload in " + image_path);
  if (lab.size() < 8 + n_lab) throw ParseError("truncated labels in " + label_path);

  const std::size_t n =
      max_samples > 0 ? std::min(max_samples, n_img) : n_img;
  Dataset ds;
  ds.dim = dim;
  ds.features.resize(n * dim);
  ds.labels.resize(n);
  int max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j)
      ds.features[i * dim + j] = img[16 + i * dim + j] / 255.0;
    ds.labels[i] = lab[8 + i];
    max_label = std::max(max_label, ds.labels[i]);
  }
  ds.n_classes = std::max(10, max_label + 1);
  return ds;
}

void WriteIdx(const std::string& image_path, const std::string& label_path,
              const std::vector<std::uint8_t>& images,
              const std::vector<std::uint8_t>& labels, std::uint32_t rows,
              std::uint32_t cols) {
  std::ofstream img(image_path, std::ios::binary);
  std::ofstream lab(label_path, std::ios::binary);
  if (!img || !lab) throw Error("cannot write IDX files");
  PutBigEndian32(img, kImageMagic);
  PutBigEndian32(img, static_cast<std::uint32_t>(labels.size()));
  PutBigEndian32(img, rows);
  PutBigEndian32(img, cols);
  img.write(reinterpret_cast<const char*>(images.data()),
            static_cast<std::streamsize>(images.size()));
  PutBigEndian32(lab, kLabelMagic);
  PutBigEndian32(lab, static_cast<std::uint32_t>(labels.size()));
  lab.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

Dataset SyntheticGen(const SyntheticSpec& spec, Rng& rng) {
  if (spec.n_classes < 2 || spec.dim == 0 || spec.n_samples == 0)
    throw ConfigError("synthetic spec needs >= 2 classes, dim and samples");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double radius = spec.separation * spec.noise_std / std::sqrt(2.0);
  std::vector<double> centers(spec.n_classes * spec.dim);
  for (int c = 0; c < spec.n_classes; ++c) {
    double norm = 0.0;
    double* center = centers.data() + c * spec.dim;
    for (std::size_t i = 0; i < spec.dim; ++i) {
      center[i] = normal(rng);
      norm += center[i] * center[i];
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < spec.dim; ++i) center[i] *= radius / norm;
  }
  std::uniform_int_distribution<int> label(0, spec.n_classes - 1);
  Dataset ds;
  ds.dim = spec.dim;
  ds.n_classes = spec.n_classes;
  ds.features.resize(spec.n_samples * spec.dim);
  ds.labels.resize(spec.n_samples);
  for (std::size_t r = 0; r < spec.n_samples; ++r) {
    const int y = label(rng);
    ds.labels[r] = y;
    const double* center = centers.data() + y * spec.dim;
    for (std::size_t i = 0; i < spec.dim; ++i)
      ds.features[r * spec.dim + i] = center[i] + spec.noise_std * normal(rng);
  }
  return ds;
}

std::vector<ClientDataset> PartitionNonIid(const Dataset& data, int n_clients,
                                           int labels_per_client,
                                           double test_fraction, Rng& rng) {
  if (n_clients < 1) throw ConfigError("need at least one client");
  if (labels_per_client < 1) throw ConfigError("labels_per_client must be >= 1");
  if (!(test_fraction >= 0 && test_fraction < 1))
    throw ConfigError("test_fraction must lie in [0, 1)");
  const std::size_t n_shards =
      static_cast<std::size_t>(n_clients) * labels_per_client;

  std::vector<std::vector<std::size_t>> by_label(data.n_classes);
  for (std::size_t r = 0; r < data.size(); ++r)
    by_label.at(data.labels[r]).push_back(r);
  for (auto& rows : by_label) std::shuffle(rows.begin(), rows.end(), rng);

  // Largest shard size that still yields enough single-label shards.
  std::size_t shard = data.size() / n_shards;
  auto available = [&](std::size_t s) {
    std::size_t total = 0;
    for (const auto& rows : by_label) total += rows.size() / s;
    return total;
  };
  while (shard > 0 && available(shard) < n_shards) --shard;
  if (shard == 0)
    throw ConfigError("not enough samples for " + std::to_string(n_shards) +
                      " label shards");

  std::vector<std::vector<std::size_t>> shards;
  for (const auto& rows : by_label) {
    for (std::size_t s = 0; s + shard <= rows.size(); s += shard)
      shards.emplace_back(rows.begin() + s, rows.begin() + s + shard);
  }
  std::shuffle(shards.begin(), shards.end(), rng);
  shards.resize(n_shards);

  std::vector<ClientDataset> clients(n_clients);
  for (int c = 0; c < n_clients; ++c) {
    std::vector<std::size_t> rows;
    for (int s = 0; s < labels_per_client; ++s) {
      const auto& piece = shards[c * labels_per_client + s];
      rows.insert(rows.end(), piece.begin(), piece.end());
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto n_test = static_cast<std::size_t>(
        std::floor(test_fraction * static_cast<double>(rows.size())));
    if (n_test == rows.size())
      throw ConfigError("client shard too small for a train split");
    const std::span<const std::size_t> all(rows);
    clients[c].test = data.Subset(all.first(n_test));
    clients[c].train = data.Subset(all.subspan(n_test));
  }
  return clients;
}

Batch SampleBatch(const Dataset& data, double rate, Rng& rng) {
  if (data.size() == 0) throw DomainError("cannot sample from an empty dataset");
  const auto want = static_cast<std::size_t>(
      std::ceil(rate * static_cast<double>(data.size())));
  const std::size_t k = std::clamp<std::size_t>(want, 1, data.size());
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  // Partial Fisher-Yates: the first k entries are a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, rows.size() - 1);
    std::swap(rows[i], rows[pick(rng)]);
  }
  return data.Subset(std::span<const std::size_t>(rows).first(k));
}

ParamVector QuadraticTask::PlOptimum(int client, double lambda) const {
  const ParamVector& a = train_means.at(client);
  ParamVector out(a.size());
  const double w = 1 - lambda / 2;
  for (std::size_t j = 0; j < a.size(); ++j)
    out[j] = (w * curvature[j] * a[j] + lambda * fl_optimum[j]) /
             (w * curvature[j] + lambda);
  return out;
}

QuadraticTask MakeQuadraticTask(const QuadraticSpec& spec, Rng& rng) {
  if (spec.n_clients < 1 || spec.dim == 0 || spec.rows_per_client < 2)
    throw ConfigError("quadratic task needs clients, dim and >= 2 rows");
  if (!(spec.a_min > 0 && spec.a_min <= spec.a_max))
    throw ConfigError("need 0 < a_min <= a_max");
  QuadraticTask task;
  std::uniform_real_distribution<double> curv(spec.a_min, spec.a_max);
  task.curvature.resize(spec.dim);
  for (double& a : task.curvature) a = curv(rng);
  task.curvature.front() = spec.a_min;
  task.curvature.back() = spec.a_max;

  std::uniform_real_distribution<double> center(-spec.spread, spec.spread);
  std::normal_distribution<double> noise(0.0, spec.noise_std);
  const auto n_test = static_cast<std::size_t>(
      std::floor(spec.test_fraction * static_cast<double>(spec.rows_per_client)));
  task.fl_optimum.assign(spec.dim, 0.0);
  for (int n = 0; n < spec.n_clients; ++n) {
    ParamVector c(spec.dim);
    for (double& v : c) v = center(rng);
    Dataset all;
    all.dim = spec.dim;
    all.n_classes = 1;
    all.labels.assign(spec.rows_per_client, 0);
    all.features.resize(spec.rows_per_client * spec.dim);
    for (std::size_t r = 0; r < spec.rows_per_client; ++r)
      for (std::size_t j = 0; j < spec.dim; ++j)
        all.features[r * spec.dim + j] = c[j] + noise(rng);
    std::vector<std::size_t> rows(spec.rows_per_client);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const std::span<const std::size_t> idx(rows);
    ClientDataset cd{all.Subset(idx.subspan(n_test)), all.Subset(idx.first(n_test))};
    ParamVector mean(spec.dim, 0.0);
    for (std::size_t r = 0; r < cd.train.size(); ++r)
      for (std::size_t j = 0; j < spec.dim; ++j)
        mean[j] += cd.train.features[r * spec.dim + j];
    for (std::size_t j = 0; j < spec.dim; ++j) {
      mean[j] /= static_cast<double>(cd.train.size());
      task.fl_optimum[j] += mean[j] / spec.n_clients;
    }
    task.train_means.push_back(std::move(mean));
    task.clients.push_back(std::move(cd));
  }
  return task;
}

}  // namespace wpfl
