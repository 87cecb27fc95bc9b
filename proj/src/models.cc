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

#include <algorithm>
#include <cmath>
#include <limits>

namespace wpfl {
namespace {

struct Offsets {
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;
};

Offsets MlpOffsets(const ModelSpec& s) {
  Offsets o;
  o.w1 = 0;
  o.b1 = s.hidden_dim * s.input_dim;
  o.w2 = o.b1 + s.hidden_dim;
  o.b2 = o.w2 + s.n_classes * s.hidden_dim;
  return o;
}

std::vector<std::size_t> LayerSizes(const ModelSpec& s) {
  const std::size_t c = s.n_classes;
  switch (s.kind) {
    case ModelKind::kMlr:
      return {c * s.input_dim, c};
    case ModelKind::kMlp:
      return {s.hidden_dim * s.input_dim, s.hidden_dim, c * s.hidden_dim, c};
    case ModelKind::kQuadratic:
      return {s.input_dim};
  }
  return {};
}

// Softmax in place; returns log-sum-exp.
double SoftmaxInPlace(std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return m + std::log(sum);
}

}  // namespace

ModelKind ParseModelKind(const std::string& name) {
  if (name == "mlr" || name == "MLR") return ModelKind::kMlr;
  if (name == "mlp" || name == "MLP" || name == "dnn" || name == "DNN")
    return ModelKind::kMlp;
  if (name == "quadratic") return ModelKind::kQuadratic;
  throw ConfigError("unknown model kind '" + name + "'");
}

std::string ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kMlr:
      return "mlr";
    case ModelKind::kMlp:
      return "mlp";
    case ModelKind::kQuadratic:
      return "quadratic";
  }
  return "?";
}

std::size_t ModelSpec::ParamCount() const {
  std::size_t total = 0;
  for (std::size_t n : LayerSizes(*this)) total += n;
  return total;
}

void ModelSpec::Validate() const {
  if (input_dim == 0) throw ConfigError("input_dim must be > 0");
  if (kind == ModelKind::kQuadratic) {
    if (curvature.size() != input_dim)
      throw ConfigError("quadratic curvature length must equal input_dim");
    for (double a : curvature)
      if (!(a > 0)) throw ConfigError("quadratic curvature must be > 0");
    return;
  }
  if (n_classes < 2) throw ConfigError("need at least two classes");
  if (kind == ModelKind::kMlp && hidden_dim == 0)
    throw ConfigError("hidden_dim must be > 0");
}

Batch Batch::Subset(std::span<const std::size_t> rows) const {
  Batch out;
  out.dim = dim;
  out.n_classes = n_classes;
  out.features.reserve(rows.size() * dim);
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) {
    const auto row = Row(r);
    out.features.insert(out.features.end(), row.begin(), row.end());
    out.labels.push_back(labels[r]);
  }
  return out;
}

std::vector<ParamVector> Unflatten(const ModelSpec& spec,
                                   std::span<const double> params) {
  const std::vector<std::size_t> sizes = LayerSizes(spec);
  if (params.size() != spec.ParamCount())
    throw DomainError("parameter length does not match the model");
  std::vector<ParamVector> layers;
  std::size_t at = 0;
  for (std::size_t n : sizes) {
    layers.emplace_back(params.begin() + at, params.begin() + at + n);
    at += n;
  }
  return layers;
}

ParamVector Flatten(const ModelSpec& spec,
                    const std::vector<ParamVector>& layers) {
  const std::vector<std::size_t> sizes = LayerSizes(spec);
  if (layers.size() != sizes.size())
    throw DomainError("layer count does not match the model");
  ParamVector out;
  out.reserve(spec.ParamCount());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (layers[i].size() != sizes[i])
      throw DomainError("layer size does not match the model");
    out.insert(out.end(), layers[i].begin(), layers[i].end());
  }
  return out;
}

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.Validate();
  param_count_ = spec_.ParamCount();
}

void Model::CheckShapes(std::span<const double> params,
                        const Batch& batch) const {
  if (params.size() != param_count_)
    throw DomainError("parameter length does not match the model");
  if (batch.dim != spec_.input_dim)
    throw DomainError("feature dimension does not match the model");
  if (batch.features.size() != batch.size() * batch.dim)
    throw DomainError("batch feature matrix is malformed");
  if (batch.size() == 0) throw DomainError("empty batch");
}

void Model::Forward(std::span<const double> p, std::span<const double> x,
                    std::vector<double>& hidden,
                    std::vector<double>& logits) const {
  const std::size_t d = spec_.input_dim;
  const std::size_t c = spec_.n_classes;
  logits.assign(c, 0.0);
  if (spec_.kind == ModelKind::kMlr) {
    const double* b = p.data() + c * d;
    for (std::size_t k = 0; k < c; ++k) {
      const double* w = p.data() + k * d;
      double z = b[k];
      for (std::size_t i = 0; i < d; ++i) z += w[i] * x[i];
      logits[k] = z;
    }
    return;
  }
  const Offsets o = MlpOffsets(spec_);
  const std::size_t h = spec_.hidden_dim;
  hidden.assign(h, 0.0);
  for (std::size_t j = 0; j < h; ++j) {
    const double* w = p.data() + o.w1 + j * d;
    double z = p[o.b1 + j];
    for (std::size_t i = 0; i < d; ++i) z += w[i] * x[i];
    hidden[j] = z > 0 ? z : 0.0;
  }
  for (std::size_t k = 0; k < c; ++k) {
    const double* w = p.data() + o.w2 + k * h;
    double z = p[o.b2 + k];
    for (std::size_t j = 0; j < h; ++j) z += w[j] * hidden[j];
    logits[k] = z;
  }
}

double Model::Loss(std::span<const double> params, const Batch& batch) const {
  CheckShapes(params, batch);
  double total = 0.0;
  if (spec_.kind == ModelKind::kQuadratic) {
    for (std::size_t r = 0; r < batch.size(); ++r) {
      const auto x = batch.Row(r);
      for (std::size_t i = 0; i < spec_.input_dim; ++i) {
        const double diff = params[i] - x[i];
        total += 0.5 * spec_.curvature[i] * diff * diff;
      }
    }
    return total / static_cast<double>(batch.size());
  }
  std::vector<double> hidden, logits;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    Forward(params, batch.Row(r), hidden, logits);
    const double label_logit = logits[batch.labels[r]];
    const double lse = SoftmaxInPlace(logits);
    total += lse - label_logit;
  }
  return total / static_cast<double>(batch.size());
}

ParamVector Model::Grad(std::span<const double> params,
                        const Batch& batch) const {
  CheckShapes(params, batch);
  ParamVector g(param_count_, 0.0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const std::size_t d = spec_.input_dim;
  if (spec_.kind == ModelKind::kQuadratic) {
    for (std::size_t r = 0; r < batch.size(); ++r) {
      const auto x = batch.Row(r);
      for (std::size_t i = 0; i < d; ++i)
        g[i] += spec_.curvature[i] * (params[i] - x[i]) * inv_n;
    }
    return g;
  }
  const std::size_t c = spec_.n_classes;
  std::vector<double> hidden, logits, back_hidden;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto x = batch.Row(r);
    Forward(params, x, hidden, logits);
    SoftmaxInPlace(logits);
    logits[batch.labels[r]] -= 1.0;  // dLoss/dlogit
    if (spec_.kind == ModelKind::kMlr) {
      for (std::size_t k = 0; k < c; ++k) {
        const double e = logits[k] * inv_n;
        double* gw = g.data() + k * d;
        for (std::size_t i = 0; i < d; ++i) gw[i] += e * x[i];
        g[c * d + k] += e;
      }
      continue;
    }
    const Offsets o = MlpOffsets(spec_);
    const std::size_t h = spec_.hidden_dim;
    back_hidden.assign(h, 0.0);
    for (std::size_t k = 0; k < c; ++k) {
      const double e = logits[k] * inv_n;
      const double* w = params.data() + o.w2 + k * h;
      double* gw = g.data() + o.w2 + k * h;
      for (std::size_t j = 0; j < h; ++j) {
        gw[j] += e * hidden[j];
        back_hidden[j] += e * w[j];
      }
      g[o.b2 + k] += e;
    }
    for (std::size_t j = 0; j < h; ++j) {
      // ReLU subgradient is 0 at exactly 0.
      if (hidden[j] <= 0) continue;
      const double e = back_hidden[j];
      double* gw = g.data() + o.w1 + j * d;
      for (std::size_t i = 0; i < d; ++i) gw[i] += e * x[i];
      g[o.b1 + j] += e;
    }
  }
  return g;
}

double Model::Accuracy(std::span<const double> params,
                       const Batch& batch) const {
  if (!is_classifier()) return std::numeric_limits<double>::quiet_NaN();
  CheckShapes(params, batch);
  std::vector<double> hidden, logits;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    Forward(params, batch.Row(r), hidden, logits);
    const auto best = std::max_element(logits.begin(), logits.end());
    if (best - logits.begin() == batch.labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

ParamVector Model::Init(Rng& rng) const {
  std::vector<std::size_t> fan_in;
  switch (spec_.kind) {
    case ModelKind::kMlr:
      fan_in = {spec_.input_dim, spec_.input_dim};
      break;
    case ModelKind::kMlp:
      fan_in = {spec_.input_dim, spec_.input_dim, spec_.hidden_dim,
                spec_.hidden_dim};
      break;
    case ModelKind::kQuadratic:
      fan_in = {1};
      break;
  }
  const std::vector<std::size_t> sizes = LayerSizes(spec_);
  ParamVector out;
  out.reserve(param_count_);
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in[l]));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t i = 0; i < sizes[l]; ++i) out.push_back(u(rng));
  }
  return out;
}

double PlLoss(const Model& model, std::span<const double> varpi,
              std::span<const double> omega, double lambda,
              const Batch& batch) {
  if (varpi.size() != omega.size())
    throw DomainError("personal and global models differ in length");
  double dist = 0.0;
  for (std::size_t i = 0; i < varpi.size(); ++i)
    dist += (varpi[i] - omega[i]) * (varpi[i] - omega[i]);
  return (1 - lambda / 2) * model.Loss(varpi, batch) + lambda / 2 * dist;
}

ParamVector PlGrad(const Model& model, std::span<const double> varpi,
                   std::span<const double> omega, double lambda,
                   const Batch& batch) {
  if (varpi.size() != omega.size())
    throw DomainError("personal and global models differ in length");
  ParamVector g = model.Grad(varpi, batch);
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = (1 - lambda / 2) * g[i] + lambda * (varpi[i] - omega[i]);
  return g;
}

}  // namespace wpfl
