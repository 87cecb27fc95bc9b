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

#ifndef WPFL_ENGINE_H_
#define WPFL_ENGINE_H_

// One WPFL training run: per round the server realizes the channels, schedules
// uploads, configures learning rates and weighting coefficients, aggregates
// the received local models and broadcasts the global model; every client then
// takes a personalized step toward the global model it received.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wpfl/channel.h"
#include "wpfl/coeffs.h"
#include "wpfl/data.h"
#include "wpfl/dpq.h"
#include "wpfl/models.h"
#include "wpfl/scheduler.h"

namespace wpfl {

enum class Policy { kProposed, kRoundRobin, kRandom, kNonAdjustment };
enum class DpMode { kQuantizationAssisted, kPlainGaussian, kNone };

Policy ParsePolicy(const std::string& name);
std::string PolicyName(Policy p);
DpMode ParseDpMode(const std::string& name);
std::string DpModeName(DpMode m);

struct EngineConfig {
  ModelSpec model;
  RadioConfig radio;
  // sigma_dp is resolved by the simulator from dp_mode unless already set.
  PrivacySpec privacy;
  Policy policy = Policy::kProposed;
  DpMode dp_mode = DpMode::kQuantizationAssisted;

  // Fixed coefficients of the baselines.
  double default_eta_f = 0.01;
  double default_eta_p = 0.01;
  double default_lambda = 0.5;

  FreeConstants free;
  // Empty: 1 - mu^2 / 8.
  std::optional<double> eps_p;
  double mu = 0.13;
  double lsmooth = 0.43;
  // Replace mu and L by EmpiricalMuL on the pooled training loss.
  bool estimate_curvature = false;
  int curvature_pairs = 200;
  double curvature_scale = 1.0;

  int warmup_rounds = 5;
  double g0_margin = 1.2;

  // 0: ceil(q_sample * |D_n|).
  std::size_t batch_size = 0;
  int max_rounds = 200;
  // Forces every bit error rate to zero.
  bool ideal_channel = false;

  void Validate() const;
};

struct ClientState {
  ParamVector fl_local;
  ParamVector pl_model;
  ParamVector last_received_global;
  ClientDataset data;
};

struct ServerState {
  ParamVector global;
  int round = 0;
};

struct RoundRecord {
  int round = 0;
  std::uint64_t channel_digest = 0;
  std::vector<int> selected;
  std::vector<int> assignment;
  std::vector<double> rho_up;    // per selected client
  std::vector<double> rho_down;  // per client
  double eta_f = 0.0;
  std::vector<double> eta_p;
  std::vector<double> lambda;
  std::vector<double> eps_p;
  std::vector<double> phi;
  double theta_l = 0.0;
  double gamma_next = 0.0;
  double fl_bound = 0.0;
  // Infinite once some client's rate factor reaches 1.
  double pl_bound = 0.0;
  std::vector<double> train_loss;
  std::vector<double> test_loss;
  std::vector<double> test_acc;
  double mean_acc = 0.0;
  double mean_train_loss = 0.0;
  double jain = 0.0;
  double max_test_loss = 0.0;
  double phi_max = 0.0;
  // Squared distance of each PL model to its optimum, when optima are known.
  std::vector<double> pl_dist_sq;
};

// u = global - eta_f * grad F(global).
ParamVector FlLocalStep(const Model& model, std::span<const double> global,
                        double eta_f, const Batch& batch);

// varpi - eta_p * [(1 - lambda/2) grad F(varpi) + lambda (varpi - global)].
ParamVector PlStep(const Model& model, std::span<const double> varpi,
                   std::span<const double> global, double eta_p,
                   double lambda, const Batch& batch);

// clip -> perturb -> local quantizer -> transmit -> dequantize.
ParamVector UploadPipeline(std::span<const double> u, const PrivacySpec& spec,
                           double ber_up, Rng& noise_rng, Rng& bit_rng);

// Element-wise mean; `previous` when nothing was received. Throws DomainError
// on a length mismatch.
ParamVector Aggregate(const std::vector<ParamVector>& received,
                      const ParamVector& previous);

// Global quantizer on [-C, C], one transmission per client.
std::vector<ParamVector> BroadcastPipeline(std::span<const double> global,
                                           double clip_c, int r_bits,
                                           std::span<const double> ber_down,
                                           std::span<Rng> bit_rngs);

// (sum x)^2 / (n sum x^2); 1 for an all-zero vector. Throws DomainError for
// an empty or negative input.
double JainIndex(std::span<const double> values);

// Max over clients flagged in `participated`; NaN when none participated.
double MaxTestLoss(std::span<const double> test_losses,
                   const std::vector<bool>& participated);

class Simulator {
 public:
  Simulator(EngineConfig config, std::vector<ClientDataset> clients,
            std::uint64_t seed);

  bool Done() const;
  RoundRecord RunRound();
  std::vector<RoundRecord> Run();

  // Enables per-round distance tracking against known PL optima, one per
  // client, and the closed-form PL bound from the initial distance.
  void SetPlOptima(std::vector<ParamVector> optima);

  const EngineConfig& config() const { return config_; }
  const BoundConstants& bound_constants() const { return consts_; }
  const ServerState& server() const { return server_; }
  const std::vector<ClientState>& clients() const { return clients_; }
  const ParticipationLedger& ledger() const { return ledger_; }
  double sigma_dp() const { return config_.privacy.sigma(); }
  double eps_p_target() const { return eps_p_target_; }
  const Model& model() const { return model_; }

 private:
  void ResolveSigma();
  void Warmup();
  Batch DrawBatch(const Dataset& data, Rng& rng) const;
  std::vector<double> PlDistances() const;

  EngineConfig config_;
  Model model_;
  std::uint64_t seed_;
  std::vector<ClientState> clients_;
  ServerState server_;
  ParticipationLedger ledger_;
  std::vector<double> distances_;
  BoundConstants consts_;
  double eps_p_target_ = 0.0;
  double min_rate_ = 0.0;
  int rr_cursor_ = 0;
  std::vector<bool> participated_;
  double fl_bound_ = 0.0;
  double phi_max_so_far_ = 0.0;
  double eps_p_max_so_far_ = 0.0;
  std::vector<ParamVector> pl_optima_;
  double initial_pl_dist_sq_ = 0.0;
};

}  // namespace wpfl

#endif  // WPFL_ENGINE_H_
