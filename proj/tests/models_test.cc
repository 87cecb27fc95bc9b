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

#include "wpfl/models.h"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

namespace wpfl {
namespace {

Batch RandomBatch(std::size_t dim, int classes, std::size_t rows, Rng& rng) {
  std::normal_distribution<double> x(0, 1);
  std::uniform_int_distribution<int> y(0, classes - 1);
  Batch b;
  b.dim = dim;
  b.n_classes = classes;
  for (std::size_t i = 0; i < rows * dim; ++i) b.features.push_back(x(rng));
  for (std::size_t i = 0; i < rows; ++i) b.labels.push_back(y(rng));
  return b;
}

ModelSpec MlrSpec(std::size_t dim, int classes) {
  ModelSpec s;
  s.kind = ModelKind::kMlr;
  s.input_dim = dim;
  s.n_classes = classes;
  return s;
}

ModelSpec MlpSpec(std::size_t dim, std::size_t hidden, int classes) {
  ModelSpec s = MlrSpec(dim, classes);
  s.kind = ModelKind::kMlp;
  s.hidden_dim = hidden;
  return s;
}

double MaxFdError(const std::function<double(const ParamVector&)>& f,
                  const ParamVector& grad, ParamVector w) {
  const double h = 1e-6;
  double worst = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double keep = w[i];
    w[i] = keep + h;
    const double up = f(w);
    w[i] = keep - h;
    const double down = f(w);
    w[i] = keep;
    const double fd = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(fd - grad[i]) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

TEST(ModelSpecTest, ParamCounts) {
  EXPECT_EQ(MlrSpec(784, 10).ParamCount(), 7850u);
  EXPECT_EQ(MlpSpec(784, 100, 10).ParamCount(), 79510u);
  ModelSpec q;
  q.kind = ModelKind::kQuadratic;
  q.input_dim = 3;
  q.curvature = {1, 2, 3};
  EXPECT_EQ(q.ParamCount(), 3u);
  q.curvature = {1, 2};
  EXPECT_THROW(q.Validate(), ConfigError);
}

TEST(ModelKindTest, ParseRoundTrip) {
  for (ModelKind k : {ModelKind::kMlr, ModelKind::kMlp, ModelKind::kQuadratic})
    EXPECT_EQ(ParseModelKind(ModelKindName(k)), k);
  EXPECT_THROW(ParseModelKind("cnn"), ConfigError);
}

TEST(MlrTest, ZeroParamsGiveLogClasses) {
  Rng rng(1);
  const Batch b = RandomBatch(5, 10, 20, rng);
  const Model m(MlrSpec(5, 10));
  const ParamVector w(m.param_count(), 0.0);
  EXPECT_NEAR(m.Loss(w, b), std::log(10.0), 1e-12);
}

TEST(MlrTest, MatchesHandRolledSoftmax) {
  Rng rng(2);
  const Batch b = RandomBatch(4, 3, 6, rng);
  const Model m(MlrSpec(4, 3));
  const ParamVector w = m.Init(rng);
  double total = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    std::vector<double> z(3);
    for (int c = 0; c < 3; ++c) {
      z[c] = w[12 + c];
      for (int j = 0; j < 4; ++j) z[c] += w[c * 4 + j] * b.Row(i)[j];
    }
    double norm = 0;
    for (double v : z) norm += std::exp(v);
    total += std::log(norm) - z[b.labels[i]];
  }
  EXPECT_NEAR(m.Loss(w, b), total / b.size(), 1e-12);
}

TEST(MlrTest, GradientMatchesFiniteDifferences) {
  Rng rng(3);
  const Batch b = RandomBatch(6, 4, 10, rng);
  const Model m(MlrSpec(6, 4));
  const ParamVector w = m.Init(rng);
  const double err = MaxFdError([&](const ParamVector& p) { return m.Loss(p, b); },
                                m.Grad(w, b), w);
  EXPECT_LT(err, 1e-6);
}

TEST(MlpTest, GradientMatchesFiniteDifferences) {
  Rng rng(4);
  const Batch b = RandomBatch(5, 3, 8, rng);
  const Model m(MlpSpec(5, 7, 3));
  const ParamVector w = m.Init(rng);
  const double err = MaxFdError([&](const ParamVector& p) { return m.Loss(p, b); },
                                m.Grad(w, b), w);
  EXPECT_LT(err, 1e-5);
}

TEST(MlrTest, LargeLogitsStayFinite) {
  Rng rng(5);
  const Batch b = RandomBatch(3, 2, 4, rng);
  const Model m(MlrSpec(3, 2));
  ParamVector w(m.param_count(), 0.0);
  w[0] = 1e4;
  EXPECT_TRUE(std::isfinite(m.Loss(w, b)));
  for (double g : m.Grad(w, b)) EXPECT_TRUE(std::isfinite(g));
}

TEST(AccuracyTest, CountsArgmaxMatches) {
  Batch b;
  b.dim = 1;
  b.n_classes = 2;
  b.features = {1, -1, 2, -3};
  b.labels = {1, 0, 0, 0};
  const Model m(MlrSpec(1, 2));
  // Logit for class 1 is x, class 0 is 0.
  const ParamVector w{0, 1, 0, 0};
  EXPECT_DOUBLE_EQ(m.Accuracy(w, b), 0.75);
}

TEST(ShapeTest, RejectsMismatchedInputs) {
  Rng rng(6);
  const Batch b = RandomBatch(3, 2, 4, rng);
  const Model m(MlrSpec(4, 2));
  EXPECT_THROW(m.Loss(ParamVector(m.param_count()), b), Error);
  const Model m2(MlrSpec(3, 2));
  EXPECT_THROW(m2.Loss(ParamVector(3), b), Error);
}

TEST(QuadraticTest, LossAndGradient) {
  ModelSpec s;
  s.kind = ModelKind::kQuadratic;
  s.input_dim = 2;
  s.curvature = {0.5, 2.0};
  const Model m(s);
  Batch b;
  b.dim = 2;
  b.n_classes = 1;
  b.features = {1, 0, 3, 2};
  b.labels = {0, 0};
  const ParamVector w{2, 1};
  // Rows (1,0) and (3,2): 0.5*(0.5*1 + 2*1) and 0.5*(0.5*1 + 2*1).
  EXPECT_NEAR(m.Loss(w, b), 1.25, 1e-15);
  const ParamVector g = m.Grad(w, b);
  EXPECT_NEAR(g[0], 0.5 * (2 - 2), 1e-15);
  EXPECT_NEAR(g[1], 2.0 * (1 - 1), 1e-15);
  EXPECT_FALSE(m.is_classifier());
}

TEST(PlLossTest, LambdaLimits) {
  Rng rng(7);
  const Batch b = RandomBatch(4, 3, 5, rng);
  const Model m(MlrSpec(4, 3));
  const ParamVector v = m.Init(rng);
  const ParamVector o = m.Init(rng);
  double dist = 0;
  for (std::size_t i = 0; i < v.size(); ++i) dist += (v[i] - o[i]) * (v[i] - o[i]);
  EXPECT_NEAR(PlLoss(m, v, o, 0.0, b), m.Loss(v, b), 1e-14);
  EXPECT_NEAR(PlLoss(m, v, o, 1.0, b), 0.5 * m.Loss(v, b) + 0.5 * dist, 1e-12);
  EXPECT_NEAR(PlLoss(m, v, o, 2.0, b), dist, 1e-12);
  const ParamVector g2 = PlGrad(m, v, o, 2.0, b);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(g2[i], 2 * (v[i] - o[i]), 1e-14);
}

TEST(PlGradTest, MatchesFiniteDifferences) {
  Rng rng(8);
  const Batch b = RandomBatch(4, 3, 6, rng);
  for (const ModelSpec& s : {MlrSpec(4, 3), MlpSpec(4, 5, 3)}) {
    const Model m(s);
    const ParamVector v = m.Init(rng);
    const ParamVector o = m.Init(rng);
    for (double lambda : {0.0, 0.7, 1.5}) {
      const double err = MaxFdError(
          [&](const ParamVector& p) { return PlLoss(m, p, o, lambda, b); },
          PlGrad(m, v, o, lambda, b), v);
      EXPECT_LT(err, 1e-5) << ModelKindName(s.kind) << " " << lambda;
    }
  }
}

TEST(FlattenTest, RoundTrip) {
  Rng rng(9);
  for (const ModelSpec& s : {MlrSpec(6, 4), MlpSpec(6, 5, 4)}) {
    const Model m(s);
    const ParamVector w = m.Init(rng);
    const std::vector<ParamVector> layers = Unflatten(s, w);
    EXPECT_EQ(layers.size(), s.kind == ModelKind::kMlr ? 2u : 4u);
    EXPECT_EQ(Flatten(s, layers), w);
  }
  EXPECT_THROW(Unflatten(MlrSpec(6, 4), ParamVector(3)), Error);
}

TEST(InitTest, BoundedByFanIn) {
  Rng rng(10);
  const Model m(MlpSpec(16, 4, 3));
  const std::vector<ParamVector> layers = Unflatten(m.spec(), m.Init(rng));
  for (double x : layers[0]) EXPECT_LE(std::abs(x), 0.25);
  for (double x : layers[2]) EXPECT_LE(std::abs(x), 0.5);
  Rng a(11), c(11);
  EXPECT_EQ(m.Init(a), m.Init(c));
}

}  // namespace
}  // namespace wpfl
