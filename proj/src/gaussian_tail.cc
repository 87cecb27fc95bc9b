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

#include "wpfl/gaussian_tail.h"

#include <cmath>
#include <numbers>

#include "wpfl/common.h"

namespace wpfl {
namespace {

constexpr double kErfcRegion = 8.0;

// Q(x) ~ pdf(x)/x * sum_k (-1)^k (2k-1)!! / x^(2k), for x > 8.
double AsymptoticUpperTail(double x) {
  const double inv_x2 = 1.0 / (x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double next = -term * (2.0 * k - 1.0) * inv_x2;
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return GaussianPdf(x) / x * sum;
}

}  // namespace

double GaussianPdf(double x) {
  return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi *
                                   std::numbers::sqrt2);
}

double GaussianTail(double x) {
  if (!std::isfinite(x)) throw DomainError("GaussianTail: non-finite input");
  if (x > kErfcRegion) return AsymptoticUpperTail(x);
  if (x < -kErfcRegion) return 1.0 - AsymptoticUpperTail(-x);
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

}  // namespace wpfl
