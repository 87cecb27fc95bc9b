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

#include "wpfl/engine.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace wpfl {
namespace {

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double Norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Dataset Pool(const std::vector<ClientDataset>& clients) {
  Dataset all;
  all.dim = clients.front().train.dim;
  all.n_classes = clients.front().train.n_classes;
  for (const auto& c : clients) {
    all.features.insert(all.features.end(), c.train.features.begin(),
                        c.train.features.end());
    all.labels.insert(all.labels.end(), c.train.labels.begin(),
                      c.train.labels.end());
  }
  return all;
}

}  // namespace

Policy ParsePolicy(const std::string& name) {
  if (name == "proposed") return Policy::kProposed;
  if (name == "round_robin") return Policy::kRoundRobin;
  if (name == "random") return Policy::kRandom;
  if (name == "non_adjustment") return Policy::kNonAdjustment;
  throw ConfigError("unknown policy '" + name + "'");
}

std::string PolicyName(Policy p) {
  switch (p) {
    case Policy::kProposed: return "proposed";
    case Policy::kRoundRobin: return "round_robin";
    case Policy::kRandom: return "random";
    case Policy::kNonAdjustment: return "non_adjustment";
  }
  return "?";
}

DpMode ParseDpMode(const std::string& name) {
  if (name == "quantization_assisted") return DpMode::kQuantizationAssisted;
  if (name == "plain_gaussian") return DpMode::kPlainGaussian;
  if (name == "none") return DpMode::kNone;
  throw ConfigError("unknown dp_mode '" + name + "'");
}

std::string DpModeName(DpMode m) {
  switch (m) {
    case DpMode::kQuantizationAssisted: return "quantization_assisted";
    case DpMode::kPlainGaussian: return "plain_gaussian";
    case DpMode::kNone: return "none";
  }
  return "?";
}

void EngineConfig::Validate() const {
  model.Validate();
  radio.Validate();
  privacy.Validate();
  if (!(default_eta_f >= 0 && default_eta_f < 1) ||
      !(default_eta_p >= 0 && default_eta_p < 1))
    throw ConfigError("default learning rates must lie in [0, 1)");
  if (!(default_lambda >= 0 && default_lambda <= 2))
    throw ConfigError("default lambda must lie in [0, 2]");
  if (!(mu > 0 && mu <= lsmooth)) throw ConfigError("need 0 < mu <= L");
  if (warmup_rounds < 1) throw ConfigError("warmup_rounds must be >= 1");
  if (!(g0_margin >= 1)) throw ConfigError("g0_margin must be >= 1");
  if (max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
  if (curvature_pairs < 2) throw ConfigError("curvature_pairs must be >= 2");
}

ParamVector FlLocalStep(const Model& model, std::span<const double> global,
                        double eta_f, const Batch& batch) {
  ParamVector u(global.begin(), global.end());
  if (eta_f == 0.0) return u;
  const ParamVector g = model.Grad(global, batch);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] -= eta_f * g[i];
  return u;
}

ParamVector PlStep(const Model& model, std::span<const double> varpi,
                   std::span<const double> global, double eta_p,
                   double lambda, const Batch& batch) {
  ParamVector out(varpi.begin(), varpi.end());
  if (eta_p == 0.0) return out;
  const ParamVector g = PlGrad(model, varpi, global, lambda, batch);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= eta_p * g[i];
  return out;
}

ParamVector UploadPipeline(std::span<const double> u, const PrivacySpec& spec,
                           double ber_up, Rng& noise_rng, Rng& bit_rng) {
  const QuantizedVector sent = MechanismMq(u, spec, noise_rng);
  return Dequantize(Transmit(sent, ber_up, bit_rng));
}

ParamVector Aggregate(const std::vector<ParamVector>& received,
                      const ParamVector& previous) {
  if (received.empty()) return previous;
  ParamVector mean(received.front().size(), 0.0);
  for (const auto& r : received) {
    if (r.size() != mean.size())
      throw DomainError("aggregate: model length mismatch");
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += r[i];
  }
  for (double& v : mean) v /= static_cast<double>(received.size());
  return mean;
}

std::vector<ParamVector> BroadcastPipeline(std::span<const double> global,
                                           double clip_c, int r_bits,
                                           std::span<const double> ber_down,
                                           std::span<Rng> bit_rngs) {
  if (ber_down.size() != bit_rngs.size())
    throw DomainError("broadcast: one RNG per client is required");
  const QuantizedVector sent =
      Quantize(global, MakeGlobalQuantizer(clip_c, r_bits));
  std::vector<ParamVector> out;
  out.reserve(ber_down.size());
  for (std::size_t n = 0; n < ber_down.size(); ++n)
    out.push_back(Dequantize(Transmit(sent, ber_down[n], bit_rngs[n])));
  return out;
}

double JainIndex(std::span<const double> values) {
  if (values.empty()) throw DomainError("Jain index of an empty vector");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double x : values) {
    if (x < 0) throw DomainError("Jain index needs non-negative values");
    sum += x;
    sum_sq += x * x;
  }
  if (sum_sq == 0.0) return 1.0;
  return sum * sum / (static_cast<double>(values.size()) * sum_sq);
}

double MaxTestLoss(std::span<const double> test_losses,
                   const std::vector<bool>& participated) {
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t n = 0; n < test_losses.size(); ++n) {
    if (n < participated.size() && participated[n]) {
      best = std::max(best, test_losses[n]);
      any = true;
    }
  }
  return any ? best : std::numeric_limits<double>::quiet_NaN();
}

Simulator::Simulator(EngineConfig config, std::vector<ClientDataset> clients,
                     std::uint64_t seed)
    : config_(std::move(config)),
      model_(config_.model),
      seed_(seed),
      ledger_(static_cast<int>(clients.size())) {
  config_.Validate();
  if (clients.size() != static_cast<std::size_t>(config_.radio.n_clients))
    throw ConfigError("client dataset count differs from radio n_clients");
  for (const auto& c : clients)
    if (c.train.size() == 0) throw ConfigError("client with no training data");

  Rng init_rng = MakeRng(seed_, Stream::kModelInit);
  server_.global = model_.Init(init_rng);
  clients_.resize(clients.size());
  for (std::size_t n = 0; n < clients.size(); ++n) {
    clients_[n].data = std::move(clients[n]);
    clients_[n].fl_local = server_.global;
    clients_[n].pl_model = server_.global;
    clients_[n].last_received_global = server_.global;
  }
  participated_.assign(clients_.size(), false);

  Rng topo = MakeRng(seed_, Stream::kTopology);
  distances_ = DrawDistances(config_.radio, topo);
  min_rate_ = MinRate(model_.param_count(), config_.privacy.r_bits,
                      config_.radio.tau_max_s);

  ResolveSigma();
  Warmup();
  eps_p_target_ = config_.eps_p ? *config_.eps_p : DefaultEpsP(consts_.mu);
  FeasibleSetsFor(eps_p_target_, consts_.mu);
  fl_bound_ = 4 * config_.privacy.clip_c * config_.privacy.clip_c;
  initial_pl_dist_sq_ = fl_bound_;
}

void Simulator::ResolveSigma() {
  PrivacySpec& p = config_.privacy;
  if (p.sigma_dp) return;
  switch (config_.dp_mode) {
    case DpMode::kQuantizationAssisted:
      p.sigma_dp = SearchSigma(p);
      break;
    case DpMode::kPlainGaussian:
      p.sigma_dp = PlainGaussianSigma(p, clients_.front().data.train.size());
      break;
    case DpMode::kNone:
      p.sigma_dp = 0.0;
      break;
  }
}

void Simulator::Warmup() {
  consts_.mu = config_.mu;
  consts_.lsmooth = config_.lsmooth;
  consts_.free = config_.free;
  consts_.clip_c = config_.privacy.clip_c;
  consts_.sigma_dp = config_.privacy.sigma();
  consts_.model_size = model_.param_count();
  consts_.r_bits = config_.privacy.r_bits;

  if (config_.estimate_curvature) {
    std::vector<ClientDataset> data;
    for (const auto& c : clients_) data.push_back(c.data);
    const Dataset pooled = Pool(data);
    Rng est_rng = MakeRng(seed_, Stream::kEstimation);
    const CurvatureEstimate est = EmpiricalMuL(
        [&](const ParamVector& w) { return model_.Grad(w, pooled); },
        model_.param_count(), config_.curvature_scale, est_rng,
        config_.curvature_pairs);
    consts_.mu = est.mu;
    consts_.lsmooth = est.lsmooth;
  }
  // Noiseless full-batch FL from the initial model, identical for every
  // policy and DP mode.
  const double eta = OptimalEtaF(consts_);
  ParamVector w = server_.global;
  double g0 = 0.0;
  double m_dist = 0.0;
  for (int r = 0; r < config_.warmup_rounds; ++r) {
    std::vector<ParamVector> locals;
    for (const auto& c : clients_) {
      const ParamVector g = model_.Grad(w, c.data.train);
      g0 = std::max(g0, Norm(g));
      ParamVector u = w;
      for (std::size_t i = 0; i < u.size(); ++i) u[i] -= eta * g[i];
      locals.push_back(std::move(u));
    }
    w = Aggregate(locals, w);
    if (r + 1 == config_.warmup_rounds) {
      for (const auto& u : locals)
        m_dist = std::max(m_dist, std::sqrt(SquaredDistance(u, w)));
    }
  }
  consts_.g0 = config_.g0_margin * g0;
  consts_.m_dist = m_dist;
  consts_.Validate();
}

void Simulator::SetPlOptima(std::vector<ParamVector> optima) {
  if (optima.size() != clients_.size())
    throw ConfigError("one PL optimum per client is required");
  pl_optima_ = std::move(optima);
  const std::vector<double> d = PlDistances();
  initial_pl_dist_sq_ = *std::max_element(d.begin(), d.end());
}

std::vector<double> Simulator::PlDistances() const {
  std::vector<double> d;
  if (pl_optima_.empty()) return d;
  for (std::size_t n = 0; n < clients_.size(); ++n)
    d.push_back(SquaredDistance(clients_[n].pl_model, pl_optima_[n]));
  return d;
}

Batch Simulator::DrawBatch(const Dataset& data, Rng& rng) const {
  if (config_.batch_size == 0)
    return SampleBatch(data, config_.privacy.q_sample, rng);
  const double rate = static_cast<double>(config_.batch_size) /
                      static_cast<double>(data.size());
  return SampleBatch(data, std::min(1.0, rate), rng);
}

bool Simulator::Done() const {
  return server_.round >= config_.max_rounds ||
         EligibleClients(ledger_, config_.privacy.t0).empty();
}

RoundRecord Simulator::RunRound() {
  if (Done()) throw StateError("the run has already terminated");
  const int t = server_.round;
  const int n_clients = static_cast<int>(clients_.size());
  RoundRecord rec;
  rec.round = t;

  // Channel draws depend only on (seed, round).
  Rng ch_rng = MakeRng(seed_, Stream::kChannel, {static_cast<std::uint64_t>(t)});
  ChannelRealization ch =
      RealizeRound(config_.radio, distances_, config_.privacy.r_bits, ch_rng);
  rec.channel_digest = ch.Digest();
  if (config_.ideal_channel) {
    std::fill(ch.uplink_ber.begin(), ch.uplink_ber.end(), 0.0);
    std::fill(ch.uplink_rho.begin(), ch.uplink_rho.end(), 0.0);
    std::fill(ch.downlink_ber.begin(), ch.downlink_ber.end(), 0.0);
    std::fill(ch.downlink_rho.begin(), ch.downlink_rho.end(), 0.0);
  }

  SchedulerContext sctx{&config_.radio, config_.privacy.t0, min_rate_};
  ScheduleDecision decision;
  switch (config_.policy) {
    case Policy::kProposed:
    case Policy::kNonAdjustment:
      decision = ScheduleRound(ch, ledger_, sctx);
      break;
    case Policy::kRoundRobin:
      decision = RoundRobinSchedule(ch, ledger_, sctx, rr_cursor_);
      break;
    case Policy::kRandom: {
      Rng srng = MakeRng(seed_, Stream::kSchedule, {static_cast<std::uint64_t>(t)});
      decision = RandomSchedule(ch, ledger_, sctx, srng);
      break;
    }
  }
  rec.selected = decision.selected;
  rec.assignment = decision.assignment;
  rec.rho_up = decision.SelectedRho(ch);
  rec.rho_down = ch.downlink_rho;
  const int n_sel = static_cast<int>(rec.selected.size());

  // Coefficients.
  const bool adjust = config_.policy == Policy::kProposed;
  rec.theta_l = ThetaL(rec.rho_up, consts_);
  rec.eta_f = adjust ? OptimalEtaF(consts_) : config_.default_eta_f;
  const double sum_eps_f = n_sel * EpsFUnchecked(rec.eta_f, consts_);
  rec.eta_p.resize(n_clients);
  rec.lambda.resize(n_clients);
  rec.eps_p.resize(n_clients);
  rec.phi.resize(n_clients);
  for (int n = 0; n < n_clients; ++n) {
    const PhiContext pctx = MakePhiContext(consts_, rec.theta_l, rec.rho_down[n],
                                           sum_eps_f, n_sel, eps_p_target_);
    if (adjust) {
      const PhiMinimum m = MinimizePhi(pctx);
      rec.eta_p[n] = m.eta_p;
      rec.lambda[n] = m.lambda;
      rec.phi[n] = m.phi;
    } else {
      rec.eta_p[n] = config_.default_eta_p;
      rec.lambda[n] = config_.default_lambda;
      rec.phi[n] = rec.lambda[n] > 0
                       ? ComputePhiTerms(rec.eta_p[n], rec.lambda[n], pctx).phi_n
                       : std::numeric_limits<double>::infinity();
    }
    rec.eps_p[n] = EpsPOf(rec.eta_p[n], rec.lambda[n], consts_.mu);
  }
  rec.phi_max = *std::max_element(rec.phi.begin(), rec.phi.end());
  const double eps_p_max = *std::max_element(rec.eps_p.begin(), rec.eps_p.end());

  // Local FL training and upload of the selected clients.
  std::vector<ParamVector> received;
  for (std::size_t i = 0; i < rec.selected.size(); ++i) {
    const int n = rec.selected[i];
    ClientState& c = clients_[n];
    Rng batch_rng = MakeRng(seed_, Stream::kClientBatch,
                            {static_cast<std::uint64_t>(t),
                             static_cast<std::uint64_t>(n), 0});
    const Batch batch = DrawBatch(c.data.train, batch_rng);
    c.fl_local = FlLocalStep(model_, c.last_received_global, rec.eta_f, batch);
    Rng noise_rng = MakeRng(seed_, Stream::kUplinkNoise,
                            {static_cast<std::uint64_t>(t),
                             static_cast<std::uint64_t>(n)});
    Rng bit_rng = MakeRng(seed_, Stream::kUplinkBits,
                          {static_cast<std::uint64_t>(t),
                           static_cast<std::uint64_t>(n)});
    const double ber = ch.uplink_ber[ch.At(n, rec.assignment[n])];
    received.push_back(
        UploadPipeline(c.fl_local, config_.privacy, ber, noise_rng, bit_rng));
    participated_[n] = true;
  }
  server_.global = Aggregate(received, server_.global);

  // Broadcast to every client.
  std::vector<Rng> bit_rngs;
  bit_rngs.reserve(n_clients);
  for (int n = 0; n < n_clients; ++n)
    bit_rngs.push_back(MakeRng(seed_, Stream::kDownlinkBits,
                               {static_cast<std::uint64_t>(t),
                                static_cast<std::uint64_t>(n)}));
  const std::vector<ParamVector> globals = BroadcastPipeline(
      server_.global, config_.privacy.clip_c, config_.privacy.r_bits,
      ch.downlink_ber, bit_rngs);

  // Personalized step at every client.
  for (int n = 0; n < n_clients; ++n) {
    ClientState& c = clients_[n];
    c.last_received_global = globals[n];
    Rng batch_rng = MakeRng(seed_, Stream::kClientBatch,
                            {static_cast<std::uint64_t>(t),
                             static_cast<std::uint64_t>(n), 1});
    const Batch batch = DrawBatch(c.data.train, batch_rng);
    c.pl_model = PlStep(model_, c.pl_model, c.last_received_global,
                        rec.eta_p[n], rec.lambda[n], batch);
  }

  // Metrics.
  rec.train_loss.resize(n_clients);
  rec.test_loss.resize(n_clients);
  rec.test_acc.resize(n_clients);
  double acc_sum = 0.0;
  double loss_sum = 0.0;
  for (int n = 0; n < n_clients; ++n) {
    const ClientState& c = clients_[n];
    rec.train_loss[n] = model_.Loss(c.pl_model, c.data.train);
    const Dataset& eval = c.data.test.size() > 0 ? c.data.test : c.data.train;
    rec.test_loss[n] = model_.Loss(c.pl_model, eval);
    rec.test_acc[n] = model_.is_classifier()
                          ? model_.Accuracy(c.pl_model, eval)
                          : std::numeric_limits<double>::quiet_NaN();
    acc_sum += rec.test_acc[n];
    loss_sum += rec.train_loss[n];
  }
  rec.mean_acc = acc_sum / n_clients;
  rec.mean_train_loss = loss_sum / n_clients;
  rec.jain = JainIndex(rec.train_loss);
  rec.max_test_loss = MaxTestLoss(rec.test_loss, participated_);

  // Bounds. The worst downlink of the round drives the FL bias term.
  const double rho_g_max =
      *std::max_element(rec.rho_down.begin(), rec.rho_down.end());
  rec.gamma_next = GammaNext(consts_, rec.theta_l, rho_g_max);
  if (n_sel > 0)
    fl_bound_ = FlBoundStep(fl_bound_, sum_eps_f / n_sel, rec.gamma_next);
  rec.fl_bound = fl_bound_;
  phi_max_so_far_ = std::max(phi_max_so_far_, rec.phi_max);
  eps_p_max_so_far_ = std::max(eps_p_max_so_far_, eps_p_max);
  rec.pl_bound = eps_p_max_so_far_ > 0 && eps_p_max_so_far_ < 1
                     ? PlBoundOverall(initial_pl_dist_sq_, eps_p_max_so_far_,
                                      phi_max_so_far_, t + 1)
                     : std::numeric_limits<double>::infinity();
  rec.pl_dist_sq = PlDistances();

  server_.round = t + 1;
  return rec;
}

std::vector<RoundRecord> Simulator::Run() {
  std::vector<RoundRecord> out;
  while (!Done()) out.push_back(RunRound());
  return out;
}

}  // namespace wpfl
