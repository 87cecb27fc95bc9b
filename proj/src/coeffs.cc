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

#include "wpfl/coeffs.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace wpfl {
namespace {

constexpr double kGoldenTol = 1e-9;

double Sq(double x) { return x * x; }

}  // namespace

double BoundConstants::beta() const {
  return 1.0 / (std::ldexp(1.0, r_bits) - 1.0);
}

void BoundConstants::Validate() const {
  if (!(mu > 0)) throw ConfigError("mu must be > 0");
  if (!(mu <= lsmooth)) throw ConfigError("need mu <= L");
  if (!(mu < 2)) throw ConfigError("mu must be < 2");
  if (!(free.phi1 > 0 && free.phi2 > 0 && free.varphi1 > 0 &&
        free.varphi2 > 0)) {
    throw ConfigError("free bound constants must be > 0");
  }
  if (!(g0 > 0)) throw ConfigError("gradient bound G0 must be > 0");
  if (!(m_dist >= 0)) throw ConfigError("optima distance M must be >= 0");
  if (!(clip_c > 0)) throw ConfigError("clip_c must be > 0");
  if (!(sigma_dp >= 0)) throw ConfigError("sigma_dp must be >= 0");
  if (model_size == 0) throw ConfigError("model size must be > 0");
  const double eps = EpsFUnchecked(OptimalEtaF(*this), *this);
  if (!(eps > 0 && eps < 1)) {
    throw ConfigError("eps_f at the optimal FL rate is " + std::to_string(eps) +
                      ", outside (0, 1); reduce the free constants or revisit "
                      "mu/L");
  }
}

double ThetaL(std::span<const double> selected_rho, const BoundConstants& k) {
  if (selected_rho.empty()) return 0.0;
  const double w = static_cast<double>(k.model_size);
  const double c = k.clip_c;
  const double s = k.sigma_dp;
  const double scale = (2 * c * c + (2 - Sq(k.beta())) * w * Sq(c + 3 * s) -
                        w * s * s) /
                       static_cast<double>(selected_rho.size());
  double sum = 0.0;
  for (double rho : selected_rho) sum += rho;
  return scale * sum;
}

double EpsFUnchecked(double eta_f, const BoundConstants& k) {
  const FreeConstants& f = k.free;
  return (1 + f.varphi1) * ((1 + f.phi2) +
                            (1 + f.phi1) * Sq(k.lsmooth) * Sq(eta_f) -
                            k.mu * eta_f);
}

double EpsF(double eta_f, const BoundConstants& k) {
  if (!(eta_f > 0 && eta_f < 1))
    throw DomainError("FL learning rate must lie in (0, 1)");
  const double eps = EpsFUnchecked(eta_f, k);
  if (!(eps > 0 && eps < 1))
    throw InfeasibleError("eps_f = " + std::to_string(eps) + " not in (0, 1)");
  return eps;
}

double OptimalEtaF(const BoundConstants& k) {
  const double eta = k.mu / (2 * (1 + k.free.phi1) * Sq(k.lsmooth));
  if (!(eta > 0 && eta < 1))
    throw InfeasibleError("optimal FL learning rate " + std::to_string(eta) +
                          " is outside (0, 1)");
  return eta;
}

Gammas GammaConstants(const BoundConstants& k, double theta_l_min,
                      double rho_down) {
  const FreeConstants& f = k.free;
  const double w = static_cast<double>(k.model_size);
  const double c2 = Sq(k.clip_c);
  const double noise = Sq(k.sigma_dp) + Sq(k.e_l_max());
  const double agg = 1 + 1 / f.phi1 + 1 / f.phi2;
  const double down = 2 * (1 + 1 / f.varphi1) * (1 + f.varphi2);

  Gammas g;
  g.gamma0 = (1 + 1 / f.varphi1) *
             (2 * (1 + 1 / f.varphi2) * c2 + 2 * w * (1 + f.varphi2) * noise +
              2 * w * (c2 - Sq(k.e_l_max())));
  g.gamma1 = w * (1 + f.varphi1) * agg * noise +
             2 * w * (1 + 1 / f.varphi1) * Sq(k.e_g_max());
  g.h1 = down * rho_down + (1 + f.varphi1) * agg;
  g.gamma2 = down * theta_l_min + g.gamma0;
  g.gamma3 = (1 + f.varphi1) * agg * theta_l_min + g.gamma1;
  return g;
}

double GammaNext(const BoundConstants& k, double theta_l, double rho_down) {
  const Gammas g = GammaConstants(k, theta_l, rho_down);
  return g.h1 * theta_l + g.gamma0 * rho_down + g.gamma1;
}

double LambdaOfEta(double eta_p, double eps_p, double mu) {
  if (eta_p == 0) throw DomainError("PL learning rate must be nonzero");
  if (!(mu < 2)) throw DomainError("lambda(eta) requires mu < 2");
  return ((1 - eps_p) / eta_p + eta_p - mu) / (1 - mu / 2);
}

double EpsPOf(double eta_p, double lambda, double mu) {
  return 1 - eta_p * ((1 - lambda / 2) * mu + lambda) + eta_p * eta_p;
}

FeasibleSets FeasibleSetsFor(double eps_p, double mu) {
  if (!(mu > 0 && mu < 2)) throw ConfigError("mu must lie in (0, 2)");
  const double floor_eps = 1 - mu * mu / 4;
  if (!(eps_p >= floor_eps && eps_p < 1)) {
    throw ConfigError("eps_p " + std::to_string(eps_p) + " outside [" +
                      std::to_string(floor_eps) + ", 1)");
  }
  const double disc = std::sqrt(std::max(0.0, mu * mu - 4 * (1 - eps_p)));
  FeasibleSets s;
  s.eta1 = 1 - std::sqrt(eps_p);
  s.eta2 = (mu - disc) / 2;
  s.eta3 = (mu + disc) / 2;
  s.omega0 = {s.eta1, s.eta2};
  if (eps_p <= 2 - mu) s.omega1 = Interval{s.eta3, 1.0};
  return s;
}

double DefaultEpsP(double mu) { return 1 - mu * mu / 8; }

PhiContext MakePhiContext(const BoundConstants& k, double theta_l_min,
                          double rho_down, double sum_eps_f, int n_selected,
                          double eps_p) {
  const Gammas g = GammaConstants(k, theta_l_min, rho_down);
  PhiContext ctx;
  ctx.consts = k;
  ctx.gamma2 = g.gamma2;
  ctx.gamma3 = g.gamma3;
  ctx.rho_down = rho_down;
  ctx.sum_eps_f = sum_eps_f;
  ctx.n_selected = n_selected;
  ctx.eps_p = eps_p;
  return ctx;
}

PhiTerms ComputePhiTerms(double eta_p, double lambda, const PhiContext& ctx) {
  if (!(lambda > 0)) throw DomainError("phi needs lambda > 0");
  const BoundConstants& k = ctx.consts;
  PhiTerms t;
  t.g_n = Sq((1 - lambda / 2) * k.g0 + lambda * (k.g0 / k.mu + k.m_dist));
  t.psi_n = (eta_p * eta_p + 1) * lambda * lambda +
            eta_p * eta_p * eta_p / lambda;
  const double fl_term =
      ctx.n_selected > 0
          ? Sq(k.g0 * k.g0 + k.m_dist * k.mu) /
                (ctx.n_selected * k.mu * k.mu) * ctx.sum_eps_f
          : 0.0;
  t.phi_n = (1 + lambda * lambda * lambda) * eta_p * eta_p * t.g_n +
            t.psi_n * (ctx.gamma2 * ctx.rho_down + ctx.gamma3 + fl_term);
  return t;
}

double PhiAlongCurve(double eta_p, const PhiContext& ctx) {
  const double lambda = LambdaOfEta(eta_p, ctx.eps_p, ctx.consts.mu);
  if (!(lambda > 0 && lambda < 2))
    return std::numeric_limits<double>::infinity();
  return ComputePhiTerms(eta_p, lambda, ctx).phi_n;
}

double GoldenSectionMinimize(const std::function<double(double)>& f,
                             Interval range, double tol) {
  constexpr double kInvPhi = std::numbers::phi - 1;  // 0.618...
  double a = range.lo;
  double b = range.hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

PhiMinimum MinimizePhi(const PhiContext& ctx) {
  const FeasibleSets sets = FeasibleSetsFor(ctx.eps_p, ctx.consts.mu);
  auto objective = [&ctx](double eta) { return PhiAlongCurve(eta, ctx); };
  auto solve = [&](Interval range, bool omega1) -> std::optional<PhiMinimum> {
    if (!(range.width() > 0)) return std::nullopt;
    const double eta = GoldenSectionMinimize(objective, range, kGoldenTol);
    const double phi = objective(eta);
    if (!std::isfinite(phi)) return std::nullopt;
    return PhiMinimum{eta, LambdaOfEta(eta, ctx.eps_p, ctx.consts.mu), phi,
                      omega1};
  };
  std::optional<PhiMinimum> best = solve(sets.omega0, false);
  if (sets.omega1) {
    std::optional<PhiMinimum> other = solve(*sets.omega1, true);
    if (other && (!best || other->phi < best->phi)) best = other;
  }
  if (!best) throw ConfigError("no feasible PL learning rate for this eps_p");
  return *best;
}

double FlBoundStep(double prev_bound, double eps_f_mean, double gamma_next) {
  if (!(prev_bound >= 0)) throw DomainError("previous bound must be >= 0");
  return eps_f_mean * prev_bound + gamma_next;
}

double PlBoundOverall(double initial_dist_sq, double eps_p_max,
                      double phi_max, int t_rounds) {
  if (!(eps_p_max > 0 && eps_p_max < 1))
    throw DomainError("eps_p_max must lie in (0, 1) for a convergent bound");
  const double decay = std::pow(eps_p_max, t_rounds);
  return decay * initial_dist_sq + (decay - 1) / (eps_p_max - 1) * phi_max;
}

CurvatureEstimate EmpiricalMuL(const GradientFn& grad, std::size_t dim,
                               double scale, Rng& rng, int n_pairs) {
  if (n_pairs < 2) throw DomainError("need at least two parameter pairs");
  std::uniform_real_distribution<double> coord(-scale, scale);
  CurvatureEstimate est;
  est.mu = std::numeric_limits<double>::infinity();
  est.lsmooth = 0.0;
  ParamVector w(dim), w2(dim);
  for (int p = 0; p < n_pairs; ++p) {
    for (std::size_t i = 0; i < dim; ++i) {
      w[i] = coord(rng);
      w2[i] = coord(rng);
    }
    double dw = 0.0;
    for (std::size_t i = 0; i < dim; ++i) dw += Sq(w[i] - w2[i]);
    if (dw == 0) continue;
    const ParamVector g = grad(w);
    const ParamVector g2 = grad(w2);
    double dg = 0.0;
    for (std::size_t i = 0; i < dim; ++i) dg += Sq(g[i] - g2[i]);
    const double ratio = std::sqrt(dg / dw);
    est.mu = std::min(est.mu, ratio);
    est.lsmooth = std::max(est.lsmooth, ratio);
    ++est.pairs_used;
  }
  if (est.pairs_used == 0) throw Error("all sampled parameter pairs coincide");
  return est;
}

}  // namespace wpfl
