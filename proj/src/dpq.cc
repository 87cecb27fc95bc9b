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

#include "wpfl/dpq.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "wpfl/gaussian_tail.h"

namespace wpfl {
namespace {

constexpr double kSigmaSearchFloor = 1e-6;
constexpr double kSigmaSearchRelTol = 1e-6;
constexpr int kMaxBracketDoublings = 60;

// delta_Q with an explicit quantization error bound `e_max`.
double DeltaQWithErrorBound(const PrivacySpec& spec, double sigma,
                            double e_max) {
  const double c = spec.clip_c;
  const double q = spec.q_sample;
  const double psi1 = GaussianTail((2 * c + 3 * sigma - e_max) / sigma) -
                      GaussianTail((2 * c + 3 * sigma + e_max) / sigma);
  const double psi =
      (1 - q) * psi1 + q * (1 - 2 * GaussianTail(e_max / sigma));
  const double psi1_edge = GaussianTail((2 * c + 3 * sigma - e_max) / sigma);
  const double psi_edge =
      (1 - q) * psi1_edge + q * GaussianTail((3 * sigma - e_max) / sigma);
  const double growth = std::exp(spec.epsilon_q / spec.t0);
  const double per_round =
      std::max(psi - psi1 * growth, psi_edge - psi1_edge * growth);
  return std::clamp(spec.t0 * per_round, 0.0, 1.0);
}

}  // namespace

void PrivacySpec::Validate() const {
  if (!(epsilon_q > 0)) throw ConfigError("epsilon_q must be > 0");
  if (!(delta_q_target >= 0 && delta_q_target <= 1))
    throw ConfigError("delta_q_target must lie in [0, 1]");
  if (t0 < 1) throw ConfigError("t0 must be >= 1");
  if (!(clip_c > 0)) throw ConfigError("clip_c must be > 0");
  if (r_bits < 2 || r_bits > 32) throw ConfigError("r_bits must lie in [2, 32]");
  if (!(q_sample >= 0 && q_sample <= 1))
    throw ConfigError("q_sample must lie in [0, 1]");
  if (sigma_dp && !(*sigma_dp >= 0)) throw ConfigError("sigma_dp must be >= 0");
}

double PrivacySpec::sigma() const {
  if (!sigma_dp) throw StateError("sigma_dp has not been resolved");
  return *sigma_dp;
}

QuantizerSpec MakeQuantizer(double lo, double hi, int r_bits) {
  if (!(lo < hi)) throw ConfigError("quantizer range must satisfy lo < hi");
  if (r_bits < 1 || r_bits > 32)
    throw ConfigError("quantizer bits must lie in [1, 32]");
  QuantizerSpec spec;
  spec.lo = lo;
  spec.hi = hi;
  spec.r_bits = r_bits;
  spec.levels = std::uint64_t{1} << r_bits;
  spec.delta = (hi - lo) / static_cast<double>(spec.levels - 1);
  return spec;
}

ParamVector ClipModel(std::span<const double> v, double c) {
  if (!(c > 0)) throw DomainError("clip threshold must be > 0");
  double norm_sq = 0.0;
  for (double x : v) norm_sq += x * x;
  const double scale = std::max(1.0, std::sqrt(norm_sq) / c);
  ParamVector out(v.begin(), v.end());
  if (scale > 1.0) {
    for (double& x : out) x /= scale;
  }
  return out;
}

QuantizerSpec MakeLocalQuantizer(const PrivacySpec& spec) {
  const double half_range = spec.clip_c + 3 * spec.sigma();
  return MakeQuantizer(-half_range, half_range, spec.r_bits);
}

QuantizerSpec MakeGlobalQuantizer(double clip_c, int r_bits) {
  return MakeQuantizer(-clip_c, clip_c, r_bits);
}

std::uint32_t QuantizeScalar(double x, const QuantizerSpec& spec) {
  const double pos = std::floor((x - spec.lo) / spec.delta + 0.5);
  // NaN compares false on both branches and saturates low.
  if (!(pos > 0)) return 0;
  const auto top = static_cast<double>(spec.levels - 1);
  if (pos >= top) return spec.MaxIndex();
  return static_cast<std::uint32_t>(pos);
}

QuantizedVector Quantize(std::span<const double> v, const QuantizerSpec& spec) {
  QuantizedVector out;
  out.spec = spec;
  out.indices.reserve(v.size());
  for (double x : v) out.indices.push_back(QuantizeScalar(x, spec));
  return out;
}

ParamVector Dequantize(const QuantizedVector& qv) {
  ParamVector out;
  out.reserve(qv.indices.size());
  for (std::uint32_t index : qv.indices) {
    if (index >= qv.spec.levels) {
      throw CorruptionError("quantized index " + std::to_string(index) +
                            " exceeds 2^R - 1");
    }
    out.push_back(qv.spec.Level(index));
  }
  return out;
}

ParamVector Perturb(std::span<const double> v, double sigma, Rng& rng) {
  if (!(sigma >= 0)) throw DomainError("noise sigma must be >= 0");
  ParamVector out(v.begin(), v.end());
  if (sigma == 0) return out;
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& x : out) x += noise(rng);
  return out;
}

QuantizedVector MechanismMq(std::span<const double> v, const PrivacySpec& spec,
                            Rng& rng) {
  const QuantizerSpec quantizer = MakeLocalQuantizer(spec);
  const ParamVector clipped = ClipModel(v, spec.clip_c);
  const ParamVector noisy = Perturb(clipped, spec.sigma(), rng);
  return Quantize(noisy, quantizer);
}

double LevelProbability(double u, std::uint64_t chi_index,
                        const PrivacySpec& spec) {
  const QuantizerSpec quantizer = MakeLocalQuantizer(spec);
  if (chi_index >= quantizer.levels)
    throw DomainError("level index out of range");
  const double sigma = spec.sigma();
  if (sigma == 0) {
    return QuantizeScalar(u, quantizer) == chi_index ? 1.0 : 0.0;
  }
  const double e_max = quantizer.MaxError();
  const double chi = quantizer.Level(chi_index);
  const double a = (chi - e_max - u) / sigma;
  const double b = (chi + e_max - u) / sigma;
  const bool bottom = chi_index == 0;
  const bool top = chi_index == quantizer.levels - 1;
  if (bottom && top) return 1.0;
  if (top) return GaussianTail(a);
  if (bottom) return GaussianTail(-b);
  // Q(a) - Q(b) loses precision when both tails are near 1; use the mirrored
  // lower tails there.
  if (b <= 0) return GaussianTail(-b) - GaussianTail(-a);
  return GaussianTail(a) - GaussianTail(b);
}

double DeltaQOfSigma(const PrivacySpec& spec, double sigma) {
  if (!(sigma > 0)) throw DomainError("sigma must be > 0");
  const double e_max =
      (spec.clip_c + 3 * sigma) / (std::ldexp(1.0, spec.r_bits) - 1);
  return DeltaQWithErrorBound(spec, sigma, e_max);
}

double DeltaQOfSigmaNoQuantizationCredit(const PrivacySpec& spec,
                                         double sigma) {
  if (!(sigma > 0)) throw DomainError("sigma must be > 0");
  return DeltaQWithErrorBound(spec, sigma, 0.0);
}

double SearchSigma(const PrivacySpec& spec) {
  spec.Validate();
  const double target = spec.delta_q_target;
  if (!(target > 0 && target < 1))
    throw ConfigError("delta_q_target must lie in (0, 1) for the sigma search");
  double lo = kSigmaSearchFloor;
  if (DeltaQOfSigma(spec, lo) <= target) return lo;
  double hi = 10 * spec.clip_c;
  int doublings = 0;
  while (DeltaQOfSigma(spec, hi) > target) {
    if (++doublings > kMaxBracketDoublings) {
      throw InfeasibleError("no sigma satisfies delta_Q <= " +
                            std::to_string(target) + " for T0=" +
                            std::to_string(spec.t0));
    }
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > kSigmaSearchRelTol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (DeltaQOfSigma(spec, mid) <= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double PlainGaussianSigma(const PrivacySpec& spec,
                          std::size_t local_dataset_size) {
  spec.Validate();
  if (local_dataset_size == 0) throw ConfigError("local dataset is empty");
  if (!(spec.delta_q_target > 0))
    throw ConfigError("Gaussian mechanism needs delta_q_target > 0");
  const double c = std::sqrt(2 * std::log(1.25 / spec.delta_q_target));
  const double sensitivity =
      2 * spec.clip_c / static_cast<double>(local_dataset_size);
  return c * spec.t0 * sensitivity / spec.epsilon_q;
}

}  // namespace wpfl
