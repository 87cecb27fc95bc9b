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

#ifndef WPFL_COEFFS_H_
#define WPFL_COEFFS_H_

// Convergence-bound calculators and the per-client coefficient optimizer.
//
// Notation follows the roles, not the symbols:
//   - eps_f(eta_f): per-round contraction of the FL global model,
//   - eps_p(eta_p, lambda): per-round contraction of a PL model,
//   - theta_l: uplink-error contribution of the selected clients,
//   - gamma0..gamma3, h1: additive bias terms of the FL recursion,
//   - phi: additive bias of the PL recursion, the quantity the scheduler
//     minimizes per client while holding eps_p equal across clients.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>

#include "wpfl/common.h"
#include "wpfl/rng.h"

namespace wpfl {

// Free positive constants of the bounds. Two pairs: the FL-aggregation pair
// (phi1, phi2) and the downlink pair (varphi1, varphi2).
struct FreeConstants {
  double phi1 = 0.01;
  double phi2 = 0.01;
  double varphi1 = 0.01;
  double varphi2 = 0.01;
};

struct BoundConstants {
  double mu = 0.0;
  double lsmooth = 0.0;
  double g0 = 0.0;
  double m_dist = 0.0;
  FreeConstants free;
  double clip_c = 0.0;
  double sigma_dp = 0.0;
  std::size_t model_size = 0;
  int r_bits = 16;

  // 1 / (2^R - 1).
  double beta() const;
  double e_l_max() const { return beta() * (clip_c + 3 * sigma_dp); }
  double e_g_max() const { return beta() * clip_c; }

  // Throws ConfigError unless 0 < mu <= L, mu < 2, every free constant and
  // bound is positive, and eps_f at the optimal FL rate lies in (0, 1).
  void Validate() const;
};

// [(2C^2 + (2 - beta^2)|w|(C + 3 sigma)^2 - |w| sigma^2) / |N_t|] * sum(rho).
// Returns 0 for an empty selection.
double ThetaL(std::span<const double> selected_rho, const BoundConstants& k);

// (1 + varphi1)((1 + phi2) + (1 + phi1) L^2 eta^2 - mu eta), unchecked.
double EpsFUnchecked(double eta_f, const BoundConstants& k);
// As above; throws InfeasibleError when the value leaves (0, 1) and
// DomainError when eta_f is outside (0, 1).
double EpsF(double eta_f, const BoundConstants& k);

// mu / (2 (1 + phi1) L^2); throws InfeasibleError when not in (0, 1).
double OptimalEtaF(const BoundConstants& k);

struct Gammas {
  double gamma0 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
  double h1 = 0.0;
};

Gammas GammaConstants(const BoundConstants& k, double theta_l_min,
                      double rho_down);

// Per-round FL bias h1(rho_G) theta_L + gamma0 rho_G + gamma1
// (= gamma2 rho_G + gamma3).
double GammaNext(const BoundConstants& k, double theta_l, double rho_down);

// Weighting coefficient that makes eps_p_of(eta_p, lambda) == eps_p.
double LambdaOfEta(double eta_p, double eps_p, double mu);

// 1 - eta ((1 - lambda/2) mu + lambda) + eta^2.
double EpsPOf(double eta_p, double lambda, double mu);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool Contains(double x) const { return x > lo && x < hi; }
};

struct FeasibleSets {
  Interval omega0;
  std::optional<Interval> omega1;
  double eta1 = 0.0;
  double eta2 = 0.0;
  double eta3 = 0.0;
};

// PL learning rates for which lambda(eta) stays inside (0, 2). Throws
// ConfigError unless mu in (0, 2) and eps_p in [1 - mu^2/4, 1).
FeasibleSets FeasibleSetsFor(double eps_p, double mu);

// Default eps_p target: 1 - mu^2 / 8.
double DefaultEpsP(double mu);

// Everything the PL bias of one client depends on besides (eta_p, lambda).
struct PhiContext {
  BoundConstants consts;
  double gamma2 = 0.0;
  double gamma3 = 0.0;
  double rho_down = 0.0;
  double sum_eps_f = 0.0;
  int n_selected = 0;
  double eps_p = 0.0;
};

PhiContext MakePhiContext(const BoundConstants& k, double theta_l_min,
                          double rho_down, double sum_eps_f, int n_selected,
                          double eps_p);

struct PhiTerms {
  double g_n = 0.0;
  double psi_n = 0.0;
  double phi_n = 0.0;
};

// Throws DomainError for lambda <= 0.
PhiTerms ComputePhiTerms(double eta_p, double lambda, const PhiContext& ctx);

// phi along the constraint curve lambda = lambda(eta); +inf where lambda
// leaves (0, 2).
double PhiAlongCurve(double eta_p, const PhiContext& ctx);

struct PhiMinimum {
  double eta_p = 0.0;
  double lambda = 0.0;
  double phi = 0.0;
  bool in_omega1 = false;
};

// Golden-section search (absolute tolerance 1e-9 on eta) of phi(eta,
// lambda(eta)) over each nonempty feasible interval; returns the better one.
PhiMinimum MinimizePhi(const PhiContext& ctx);

// Golden-section search of a unimodal function on the open interval.
double GoldenSectionMinimize(const std::function<double(double)>& f,
                             Interval range, double tol);

double FlBoundStep(double prev_bound, double eps_f_mean, double gamma_next);

// eps^T initial + ((eps^T - 1) / (eps - 1)) phi_max. Throws DomainError for
// eps_p_max outside (0, 1).
double PlBoundOverall(double initial_dist_sq, double eps_p_max,
                      double phi_max, int t_rounds);

using GradientFn = std::function<ParamVector(const ParamVector&)>;

struct CurvatureEstimate {
  double mu = 0.0;
  double lsmooth = 0.0;
  int pairs_used = 0;
};

// Min and max of ||grad(w) - grad(w')|| / ||w - w'|| over `n_pairs` pairs
// drawn uniformly from [-scale, scale]^dim. Coincident pairs are skipped;
// throws Error when none remain.
CurvatureEstimate EmpiricalMuL(const GradientFn& grad, std::size_t dim,
                               double scale, Rng& rng, int n_pairs);

}  // namespace wpfl

#endif  // WPFL_COEFFS_H_
