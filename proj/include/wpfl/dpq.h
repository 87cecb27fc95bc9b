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

#ifndef WPFL_DPQ_H_
#define WPFL_DPQ_H_

// Clipping, the uniform quantization codec, Gaussian perturbation, the
// quantization-assisted Gaussian mechanism and its privacy accountant.
//
// The mechanism is clip -> add N(0, sigma^2) per element -> round to the
// nearest of 2^R uniformly spaced levels on [-(C+3 sigma), C+3 sigma]. The
// accountant bounds the per-round privacy loss by comparing the probability of
// landing on each level under adjacent datasets and composes it linearly over
// the T0 rounds in which a client may upload.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wpfl/common.h"
#include "wpfl/rng.h"

namespace wpfl {

struct PrivacySpec {
  double epsilon_q = 1.0;
  double delta_q_target = 1e-3;
  int t0 = 20;
  double clip_c = 3.0;
  int r_bits = 16;
  double q_sample = 0.01;
  // Resolved noise scale; empty until calibration.
  std::optional<double> sigma_dp;

  // Throws ConfigError if any field is outside its admissible range.
  void Validate() const;
  // Throws StateError when sigma_dp has not been resolved.
  double sigma() const;
};

struct QuantizerSpec {
  double lo = 0.0;
  double hi = 0.0;
  int r_bits = 0;
  double delta = 0.0;
  std::uint64_t levels = 0;

  double Level(std::uint64_t index) const {
    return lo + static_cast<double>(index) * delta;
  }
  // Largest reconstruction error for in-range inputs.
  double MaxError() const { return 0.5 * delta; }
  std::uint32_t MaxIndex() const {
    return static_cast<std::uint32_t>(levels - 1);
  }
};

// Builds a quantizer on [lo, hi] with 2^r_bits levels. Throws ConfigError for
// lo >= hi or r_bits outside [1, 32].
QuantizerSpec MakeQuantizer(double lo, double hi, int r_bits);

struct QuantizedVector {
  std::vector<std::uint32_t> indices;
  QuantizerSpec spec;
};

// v / max(1, ||v||_2 / c).
ParamVector ClipModel(std::span<const double> v, double c);

// Range [-(C + 3 sigma), C + 3 sigma]; requires a resolved sigma.
QuantizerSpec MakeLocalQuantizer(const PrivacySpec& spec);

// Range [-C, C].
QuantizerSpec MakeGlobalQuantizer(double clip_c, int r_bits);

// Nearest level, ties to the higher index, saturating outside [lo, hi].
std::uint32_t QuantizeScalar(double x, const QuantizerSpec& spec);
QuantizedVector Quantize(std::span<const double> v, const QuantizerSpec& spec);

// Throws CorruptionError for an index >= 2^R.
ParamVector Dequantize(const QuantizedVector& qv);

// v + z, z_i ~ N(0, sigma^2) i.i.d. Throws DomainError for sigma < 0.
ParamVector Perturb(std::span<const double> v, double sigma, Rng& rng);

// quantize(perturb(clip(v))) with the local quantizer of `spec`.
QuantizedVector MechanismMq(std::span<const double> v, const PrivacySpec& spec,
                            Rng& rng);

// Probability that the mechanism maps a scalar u (|u| <= C) to level
// `chi_index`. Interior levels own [chi - E, chi + E); the two edge levels
// also absorb the saturated tails. For sigma = 0 this is the indicator of the
// nearest level.
double LevelProbability(double u, std::uint64_t chi_index,
                        const PrivacySpec& spec);

// delta_Q(sigma) for the quantization-assisted mechanism, composed over T0
// rounds, clamped to [0, 1]. Throws DomainError for sigma <= 0.
double DeltaQOfSigma(const PrivacySpec& spec, double sigma);

// Same expression with the quantization error bound forced to zero. Kept for
// analysis: it degenerates to at most T0 * q * Q(3) for every sigma and is
// therefore not used to calibrate the plain Gaussian baseline.
double DeltaQOfSigmaNoQuantizationCredit(const PrivacySpec& spec,
                                         double sigma);

// Smallest sigma with DeltaQOfSigma(sigma) <= delta_q_target, by bisection to
// relative tolerance 1e-6 over [1e-6, 10 C] (upper end doubled while needed).
// Throws InfeasibleError when no sigma qualifies.
double SearchSigma(const PrivacySpec& spec);

// Classical Gaussian mechanism that ignores quantization: sigma =
// c * T0 * (2C / local_dataset_size) / epsilon_Q with
// c = sqrt(2 ln(1.25 / delta_Q)).
double PlainGaussianSigma(const PrivacySpec& spec,
                          std::size_t local_dataset_size);

}  // namespace wpfl

#endif  // WPFL_DPQ_H_
