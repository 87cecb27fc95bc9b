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

#include "wpfl/channel.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "wpfl/gaussian_tail.h"

namespace wpfl {

double DbmToWatts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

void RadioConfig::Validate() const {
  if (n_clients < 1) throw ConfigError("n_clients must be >= 1");
  if (n_subchannels < 1) throw ConfigError("n_subchannels must be >= 1");
  if (!(subchannel_bandwidth_hz > 0))
    throw ConfigError("subchannel bandwidth must be > 0");
  if (!(min_distance_m >= 1 && min_distance_m < cell_radius_m))
    throw ConfigError("need 1 <= min_distance < cell_radius");
  if (!(tau_max_s > 0)) throw ConfigError("tau_max must be > 0");
  BerMqam(1.0, modulation_order);
}

double RadioConfig::NoisePowerWatts() const {
  return DbmToWatts(noise_density_dbm_hz) * subchannel_bandwidth_hz;
}

double RadioConfig::ClientPowerWatts() const {
  return DbmToWatts(client_power_max_dbm);
}

double RadioConfig::BsPowerWatts() const { return DbmToWatts(bs_power_dbm); }

double PathLossLinear(double distance_m, const RadioConfig& cfg) {
  if (!(distance_m >= 1)) throw DomainError("path loss needs distance >= 1 m");
  const double db =
      cfg.pathloss_ref_db - 10 * cfg.pathloss_exponent * std::log10(distance_m);
  return std::pow(10.0, db / 10.0);
}

double DrawFading(double mean_gain, Rng& rng) {
  if (!(mean_gain > 0)) throw DomainError("mean gain must be > 0");
  std::exponential_distribution<double> power(1.0);
  double g = 0.0;
  // Exp(1) can return exactly 0 with negligible probability; gains stay > 0.
  while (g <= 0) g = power(rng);
  return g * mean_gain;
}

double Snr(double p_tx_watts, double gain, double noise_watts) {
  return p_tx_watts * gain / noise_watts;
}

double BerMqam(double gamma, int m_order) {
  if (m_order < 4 || !std::has_single_bit(static_cast<unsigned>(m_order)) ||
      std::countr_zero(static_cast<unsigned>(m_order)) % 2 != 0) {
    throw ConfigError("modulation order must be a power of 4 (square QAM)");
  }
  if (!(gamma >= 0)) throw DomainError("SNR must be >= 0");
  const double sqrt_m = std::sqrt(static_cast<double>(m_order));
  const double bits = std::log2(static_cast<double>(m_order));
  const double coeff = 2 * (sqrt_m - 1) / (sqrt_m * std::log2(sqrt_m));
  const double arg = std::sqrt(3 * gamma * bits / (m_order - 1));
  const double ber = coeff * (std::isfinite(arg) ? GaussianTail(arg) : 0.0);
  return std::clamp(ber, 0.0, 0.5);
}

double ElementErrorProb(double ber, int r_bits) {
  if (!(ber >= 0 && ber <= 1)) throw DomainError("BER must lie in [0, 1]");
  // -expm1(R log1p(-ber)) keeps precision for tiny BER.
  if (ber == 1) return 1.0;
  return -std::expm1(r_bits * std::log1p(-ber));
}

double Rate(double gamma, double bandwidth_hz) {
  return bandwidth_hz * std::log2(1 + gamma);
}

double MinRate(std::size_t model_size, int r_bits, double tau_max_s) {
  return static_cast<double>(model_size) * r_bits / tau_max_s;
}

std::uint64_t ChannelRealization::Digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const std::vector<double>& values) {
    for (double v : values) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xff;
        h *= 0x100000001b3ULL;
      }
    }
  };
  mix(uplink_gain);
  mix(downlink_gain);
  return h;
}

std::vector<double> DrawDistances(const RadioConfig& cfg, Rng& rng) {
  std::uniform_real_distribution<double> d(cfg.min_distance_m,
                                           cfg.cell_radius_m);
  std::vector<double> out(cfg.n_clients);
  for (double& x : out) x = d(rng);
  return out;
}

ChannelRealization RealizeRound(const RadioConfig& cfg,
                                const std::vector<double>& distances,
                                int r_bits, Rng& rng) {
  cfg.Validate();
  if (static_cast<int>(distances.size()) != cfg.n_clients)
    throw ConfigError("distance count does not match n_clients");
  ChannelRealization ch;
  ch.n_clients = cfg.n_clients;
  ch.n_subchannels = cfg.n_subchannels;
  const std::size_t pairs =
      static_cast<std::size_t>(cfg.n_clients) * cfg.n_subchannels;
  ch.uplink_gain.resize(pairs);
  ch.uplink_snr.resize(pairs);
  ch.uplink_ber.resize(pairs);
  ch.uplink_rho.resize(pairs);
  ch.uplink_rate.resize(pairs);
  ch.downlink_gain.resize(cfg.n_clients);
  ch.downlink_snr.resize(cfg.n_clients);
  ch.downlink_ber.resize(cfg.n_clients);
  ch.downlink_rho.resize(cfg.n_clients);

  const double noise = cfg.NoisePowerWatts();
  const double p_client = cfg.ClientPowerWatts();
  const double p_bs = cfg.BsPowerWatts();
  for (int n = 0; n < cfg.n_clients; ++n) {
    const double mean_gain = PathLossLinear(distances[n], cfg);
    for (int k = 0; k < cfg.n_subchannels; ++k) {
      const std::size_t i = ch.At(n, k);
      ch.uplink_gain[i] = DrawFading(mean_gain, rng);
      ch.uplink_snr[i] = Snr(p_client, ch.uplink_gain[i], noise);
      ch.uplink_ber[i] = BerMqam(ch.uplink_snr[i], cfg.modulation_order);
      ch.uplink_rho[i] = ElementErrorProb(ch.uplink_ber[i], r_bits);
      ch.uplink_rate[i] = Rate(ch.uplink_snr[i], cfg.subchannel_bandwidth_hz);
    }
    ch.downlink_gain[n] = DrawFading(mean_gain, rng);
    ch.downlink_snr[n] = Snr(p_bs, ch.downlink_gain[n], noise);
    ch.downlink_ber[n] = BerMqam(ch.downlink_snr[n], cfg.modulation_order);
    ch.downlink_rho[n] = ElementErrorProb(ch.downlink_ber[n], r_bits);
  }
  return ch;
}

QuantizedVector Transmit(const QuantizedVector& qv, double ber, Rng& rng) {
  if (!(ber >= 0 && ber <= 1)) throw DomainError("BER must lie in [0, 1]");
  QuantizedVector out = qv;
  if (ber == 0) return out;
  const int r = qv.spec.r_bits;
  const std::uint32_t mask =
      r == 32 ? 0xffffffffu : ((std::uint32_t{1} << r) - 1);
  if (ber == 1) {
    for (std::uint32_t& idx : out.indices) idx = ~idx & mask;
    return out;
  }
  const std::uint64_t total_bits =
      static_cast<std::uint64_t>(out.indices.size()) * r;
  // Number of untouched bits before the next flip: floor(ln U / ln(1 - ber)).
  const double log_keep = std::log1p(-ber);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto next_gap = [&]() -> double {
    const double u = 1.0 - unit(rng);  // (0, 1]
    return std::floor(std::log(u) / log_keep);
  };
  double pos = next_gap();
  while (pos < static_cast<double>(total_bits)) {
    const auto bit = static_cast<std::uint64_t>(pos);
    out.indices[bit / r] ^= std::uint32_t{1} << (bit % r);
    pos += next_gap() + 1;
  }
  return out;
}

}  // namespace wpfl
