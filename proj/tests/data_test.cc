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

#include <gtest/gtest.h>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace wpfl {
namespace {

namespace fs = std::filesystem;

class IdxTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("wpfl_idx_" + std::to_string(::testing::UnitTest::GetInstance()
                                             ->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    images_.resize(4 * 2 * 3);
    for (std::size_t i = 0; i < images_.size(); ++i)
      images_[i] = static_cast<std::uint8_t>(i * 11);
    images_[5] = 255;
    labels_ = {3, 1, 4, 1};
    img_ = (dir_ / "img").string();
    lbl_ = (dir_ / "lbl").string();
    WriteIdx(img_, lbl_, images_, labels_, 2, 3);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
  std::vector<std::uint8_t> images_;
  std::vector<std::uint8_t> labels_;
  std::string img_;
  std::string lbl_;
};

std::vector<char> ReadAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void WriteAll(const std::string& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

TEST_F(IdxTest, ReadsPlainFiles) {
  const Dataset d = LoadIdx(img_, lbl_);
  ASSERT_EQ(d.size(), 4u);
  EXPECT_EQ(d.dim, 6u);
  EXPECT_EQ(d.n_classes, 10);
  EXPECT_EQ(d.labels, (std::vector<int>{3, 1, 4, 1}));
  EXPECT_DOUBLE_EQ(d.features[5], 1.0);
  EXPECT_DOUBLE_EQ(d.features[0], 0.0);
  EXPECT_DOUBLE_EQ(d.features[7], 77.0 / 255.0);
}

TEST_F(IdxTest, ReadsGzipFiles) {
  const std::string gz = img_ + ".gz";
  const std::vector<char> raw = ReadAll(img_);
  gzFile f = gzopen(gz.c_str(), "wb");
  ASSERT_NE(f, nullptr);
  gzwrite(f, raw.data(), static_cast<unsigned>(raw.size()));
  gzclose(f);
  const Dataset a = LoadIdx(gz, lbl_);
  const Dataset b = LoadIdx(img_, lbl_);
  EXPECT_EQ(a.features, b.features);
}

TEST_F(IdxTest, MaxSamplesTruncates) {
  EXPECT_EQ(LoadIdx(img_, lbl_, 2).size(), 2u);
}

TEST_F(IdxTest, BadMagicFails) {
  std::vector<char> raw = ReadAll(img_);
  raw[3] = 0x01;
  WriteAll(img_, raw);
  EXPECT_THROW(LoadIdx(img_, lbl_), ParseError);
}

TEST_F(IdxTest, TruncatedFails) {
  std::vector<char> raw = ReadAll(img_);
  raw.resize(raw.size() - 3);
  WriteAll(img_, raw);
  EXPECT_THROW(LoadIdx(img_, lbl_), ParseError);
}

TEST_F(IdxTest, CountMismatchFails) {
  const std::string img3 = (dir_ / "img3").string();
  const std::string lbl3 = (dir_ / "lbl3").string();
  WriteIdx(img3, lbl3, {images_.begin(), images_.begin() + 18}, {3, 1, 4}, 2,
           3);
  EXPECT_THROW(LoadIdx(img_, lbl3), ParseError);
}

TEST_F(IdxTest, MissingFileFails) {
  EXPECT_THROW(LoadIdx((dir_ / "none").string(), lbl_), Error);
}

SyntheticSpec SmallSpec() {
  SyntheticSpec s;
  s.dim = 20;
  s.n_samples = 1000;
  return s;
}

TEST(SyntheticTest, DeterministicPerSeed) {
  Rng a(3), b(3), c(4);
  const Dataset x = SyntheticGen(SmallSpec(), a);
  EXPECT_EQ(x.features, SyntheticGen(SmallSpec(), b).features);
  EXPECT_NE(x.features, SyntheticGen(SmallSpec(), c).features);
}

TEST(SyntheticTest, LabelsRoughlyUniform) {
  Rng rng(5);
  SyntheticSpec s = SmallSpec();
  s.n_samples = 10000;
  const Dataset d = SyntheticGen(s, rng);
  std::map<int, int> counts;
  for (int y : d.labels) ++counts[y];
  ASSERT_EQ(counts.size(), 10u);
  // Binomial(10000, 0.1) std is 30.
  for (const auto& [label, n] : counts) EXPECT_NEAR(n, 1000, 150) << label;
}

TEST(SyntheticTest, WellSeparatedClassesAreLearnable) {
  Rng rng(6);
  SyntheticSpec s = SmallSpec();
  s.separation = 10.0;
  const Dataset d = SyntheticGen(s, rng);
  ModelSpec ms;
  ms.input_dim = s.dim;
  ms.n_classes = s.n_classes;
  const Model m(ms);
  ParamVector w(m.param_count(), 0.0);
  for (int step = 0; step < 200; ++step) {
    const ParamVector g = m.Grad(w, d);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= 0.1 * g[i];
  }
  EXPECT_GT(m.Accuracy(w, d), 0.99);
}

TEST(PartitionTest, ShardProperties) {
  Rng rng(7);
  const Dataset d = SyntheticGen(SmallSpec(), rng);
  const std::vector<ClientDataset> parts = PartitionNonIid(d, 20, 2, 0.2, rng);
  ASSERT_EQ(parts.size(), 20u);
  const std::size_t train = parts[0].train.size();
  const std::size_t test = parts[0].test.size();
  EXPECT_GT(train, 0u);
  EXPECT_GT(test, 0u);
  std::size_t total = 0;
  for (const ClientDataset& c : parts) {
    EXPECT_EQ(c.train.size(), train);
    EXPECT_EQ(c.test.size(), test);
    std::set<int> labels(c.train.labels.begin(), c.train.labels.end());
    labels.insert(c.test.labels.begin(), c.test.labels.end());
    EXPECT_LE(labels.size(), 2u);
    EXPECT_EQ(c.train.dim, d.dim);
    total += c.train.size() + c.test.size();
  }
  EXPECT_LE(total, d.size());
  EXPECT_NEAR(static_cast<double>(test) / (train + test), 0.2, 0.05);
}

TEST(PartitionTest, RejectsImpossibleSplits) {
  Rng rng(8);
  SyntheticSpec s = SmallSpec();
  s.n_samples = 30;
  const Dataset d = SyntheticGen(s, rng);
  EXPECT_THROW(PartitionNonIid(d, 100, 2, 0.2, rng), ConfigError);
  EXPECT_THROW(PartitionNonIid(d, 0, 2, 0.2, rng), ConfigError);
  EXPECT_THROW(PartitionNonIid(d, 2, 2, 1.5, rng), ConfigError);
}

TEST(SampleBatchTest, SizeAndDistinctRows) {
  Rng rng(9);
  const Dataset d = SyntheticGen(SmallSpec(), rng);
  EXPECT_EQ(SampleBatch(d, 0.0001, rng).size(), 1u);
  EXPECT_EQ(SampleBatch(d, 0.0105, rng).size(), 11u);
  EXPECT_EQ(SampleBatch(d, 1.0, rng).size(), d.size());
  const Batch b = SampleBatch(d, 0.5, rng);
  std::set<std::vector<double>> rows;
  for (std::size_t i = 0; i < b.size(); ++i)
    rows.emplace(b.Row(i).begin(), b.Row(i).end());
  EXPECT_EQ(rows.size(), b.size());
}

TEST(QuadraticTaskTest, OptimaAreStationaryPoints) {
  Rng rng(10);
  QuadraticSpec s;
  s.n_clients = 5;
  const QuadraticTask task = MakeQuadraticTask(s, rng);
  ASSERT_EQ(task.clients.size(), 5u);
  EXPECT_DOUBLE_EQ(*std::min_element(task.curvature.begin(), task.curvature.end()), 0.5);
  EXPECT_DOUBLE_EQ(*std::max_element(task.curvature.begin(), task.curvature.end()), 1.2);
  ModelSpec ms;
  ms.kind = ModelKind::kQuadratic;
  ms.input_dim = s.dim;
  ms.curvature = task.curvature;
  const Model m(ms);
  ParamVector total(s.dim, 0.0);
  for (int n = 0; n < 5; ++n) {
    const ParamVector g = m.Grad(task.train_means[n], task.clients[n].train);
    for (double x : g) EXPECT_NEAR(x, 0.0, 1e-12);
    const ParamVector gf = m.Grad(task.fl_optimum, task.clients[n].train);
    for (std::size_t i = 0; i < s.dim; ++i) total[i] += gf[i];
    const ParamVector p = task.PlOptimum(n, 0.8);
    const ParamVector gp = PlGrad(m, p, task.fl_optimum, 0.8, task.clients[n].train);
    for (double x : gp) EXPECT_NEAR(x, 0.0, 1e-12);
  }
  for (double x : total) EXPECT_NEAR(x, 0.0, 1e-12);
}

}  // namespace
}  // namespace wpfl
