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

#ifndef WPFL_CHANNEL_H_
#define WPFL_CHANNEL_H_

// OFDMA radio model: path loss, Rayleigh fading, SNR, M-QAM bit error rate,
// per-element error probability and bit-level corruption of quantized
// vectors.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "wpfl/dpq.h"
#include "wpfl/rng.h"

namespace wpfl {

struct RadioConfig {
  int n_clients = 20;
  int n_subchannels = 10;
  double subchannel_bandwidth_hz = 1e6;
  double noise_density_dbm_hz = -169.0;
  double client_power_max_dbm = 23.0;
  double bs_power_dbm = 30.0;
  int modulation_order = 256;
  double pathloss_ref_db = -30.0;
  double pathloss_exponent = 2.8;
  double cell_radius_m = 100.0;
  double min_distance_m = 10.0;
  double tau_max_s = 0.01;

  void Validate() const;
  double NoisePowerWatts() const;
  double ClientPowerWatts() const;
  double BsPowerWatts() const;
};

double DbmToWatts(double dbm);

// Linear gain 10^((ref_db - 10 * exponent * log10(d)) / 10). Throws
// DomainError for d < 1 m.
double PathLossLinear(double distance_m, const RadioConfig& cfg);

// |h|^2 of a Rayleigh channel with mean `mean_gain`: Exp(1) * mean_gain.
double DrawFading(double mean_gain, Rng& rng);

double Snr(double p_tx_watts, double gain, double noise_watts);

// M-QAM bit error rate, clamped to [0, 0.5]. Throws ConfigError unless M is an
// even power of two >= 4.
double BerMqam(double gamma, int m_order);

// 1 - (1 - ber)^R.
double ElementErrorProb(double ber, int r_bits);

// B log2(1 + gamma).
double Rate(double gamma, double bandwidth_hz);

// |w| R / tau_max.
double MinRate(std::size_t model_size, int r_bits, double tau_max_s);

struct ChannelRealization {
  int n_clients = 0;
  int n_subchannels = 0;
  // Row-major [client][subchannel].
  std::vector<double> uplink_gain;
  std::vector<double> uplink_snr;
  std::vector<double> uplink_ber;
  std::vector<double> uplink_rho;
  std::vector<double> uplink_rate;
  std::vector<double> downlink_gain;
  std::vector<double> downlink_snr;
  std::vector<double> downlink_ber;
  std::vector<double> downlink_rho;

  std::size_t At(int client, int subchannel) const {
    return static_cast<std::size_t>(client) * n_subchannels + subchannel;
  }
  // FNV-1a over the raw gains; identical across policies that share draws.
  std::uint64_t Digest() const;
};

// Client distances, uniform in [min_distance, cell_radius].
std::vector<double> DrawDistances(const RadioConfig& cfg, Rng& rng);

// Fresh fading for every (client, subchannel) uplink pair and every client
// downlink. Uplink SNRs use the client power cap; downlink SNRs use the BS
// power over one subchannel bandwidth.
ChannelRealization RealizeRound(const RadioConfig& cfg,
                                const std::vector<double>& distances,
                                int r_bits, Rng& rng);

// Flips every bit of every R-bit index independently with probability `ber`.
// Uses geometric gap sampling, so the cost scales with the number of flips.
QuantizedVector Transmit(const QuantizedVector& qv, double ber, Rng& rng);

}  // namespace wpfl

#endif  // WPFL_CHANNEL_H_
