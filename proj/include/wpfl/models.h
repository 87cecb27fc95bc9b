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

#ifndef WPFL_MODELS_H_
#define WPFL_MODELS_H_

// Trainable models over flat parameter vectors: multinomial logistic
// regression, a one-hidden-layer ReLU MLP, and a diagonal quadratic whose
// optimum is known in closed form (used for bound checks).

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wpfl/common.h"
#include "wpfl/rng.h"

namespace wpfl {

enum class ModelKind { kMlr, kMlp, kQuadratic };

ModelKind ParseModelKind(const std::string& name);
std::string ModelKindName(ModelKind kind);

struct ModelSpec {
  ModelKind kind = ModelKind::kMlr;
  std::size_t input_dim = 784;
  std::size_t hidden_dim = 100;
  int n_classes = 10;
  // Quadratic only: per-coordinate curvature, length input_dim.
  std::vector<double> curvature;

  std::size_t ParamCount() const;
  void Validate() const;
};

// Row-major features with one label per row. Labels are ignored by the
// quadratic model, whose rows are anchor points.
struct Batch {
  std::size_t dim = 0;
  int n_classes = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> Row(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }
  Batch Subset(std::span<const std::size_t> rows) const;
};

// Per-layer views of the flat vector. MLR: {W (classes x input), b}. MLP:
// {W1 (hidden x input), b1, W2 (classes x hidden), b2}. Quadratic: {w}.
std::vector<ParamVector> Unflatten(const ModelSpec& spec,
                                   std::span<const double> params);
ParamVector Flatten(const ModelSpec& spec,
                    const std::vector<ParamVector>& layers);

class Model {
 public:
  explicit Model(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  std::size_t param_count() const { return param_count_; }
  bool is_classifier() const { return spec_.kind != ModelKind::kQuadratic; }

  // Mean cross-entropy (classifiers) or mean 0.5 (w - x)^T A (w - x).
  double Loss(std::span<const double> params, const Batch& batch) const;
  ParamVector Grad(std::span<const double> params, const Batch& batch) const;
  // Fraction of rows whose argmax logit matches the label.
  double Accuracy(std::span<const double> params, const Batch& batch) const;

  // Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer.
  ParamVector Init(Rng& rng) const;

 private:
  void CheckShapes(std::span<const double> params, const Batch& batch) const;
  // Logits for one row; hidden activations written to `hidden` for the MLP.
  void Forward(std::span<const double> params, std::span<const double> x,
               std::vector<double>& hidden, std::vector<double>& logits) const;

  ModelSpec spec_;
  std::size_t param_count_;
};

// (1 - lambda/2) F(varpi) + (lambda/2) ||varpi - omega||^2.
double PlLoss(const Model& model, std::span<const double> varpi,
              std::span<const double> omega, double lambda,
              const Batch& batch);

// (1 - lambda/2) grad F(varpi) + lambda (varpi - omega).
ParamVector PlGrad(const Model& model, std::span<const double> varpi,
                   std::span<const double> omega, double lambda,
                   const Batch& batch);

}  // namespace wpfl

#endif  // WPFL_MODELS_H_
