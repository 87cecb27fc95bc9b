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

#ifndef WPFL_SCHEDULER_H_
#define WPFL_SCHEDULER_H_

// Per-round client selection, subchannel allocation and power control, plus
// the round-robin and random baselines. Every policy respects the upload
// budget T0, one subchannel per client, one client per subchannel, the power
// cap and the minimum-rate constraint.

#include <vector>

#include "wpfl/assignment.h"
#include "wpfl/channel.h"
#include "wpfl/rng.h"

namespace wpfl {

struct ParticipationLedger {
  std::vector<int> uploads_used;

  explicit ParticipationLedger(int n_clients = 0)
      : uploads_used(n_clients, 0) {}
  int n_clients() const { return static_cast<int>(uploads_used.size()); }
};

struct ScheduleDecision {
  std::vector<int> selected;    // increasing client order
  std::vector<int> assignment;  // per client: subchannel or -1
  std::vector<double> power_w;  // per client: 0 when unselected

  // Uplink element error probabilities of the selected clients, in
  // `selected` order.
  std::vector<double> SelectedRho(const ChannelRealization& ch) const;
};

struct SchedulerContext {
  const RadioConfig* radio = nullptr;
  int t0 = 0;
  double min_rate = 0.0;
};

std::vector<int> EligibleClients(const ParticipationLedger& ledger, int t0);

bool IsRateFeasible(const ChannelRealization& ch, int client, int subchannel,
                    double min_rate);

// cost[n][k] = uplink rho for eligible n on rate-feasible k; every other cell
// is infeasible.
CostMatrix BuildCostMatrix(const ChannelRealization& ch,
                           const std::vector<int>& eligible, double min_rate);

// KM allocation at full power. Increments the ledger of selected clients.
ScheduleDecision ScheduleRound(const ChannelRealization& ch,
                               ParticipationLedger& ledger,
                               const SchedulerContext& ctx);

// Next K eligible clients in cyclic order from `cursor`; each takes the
// highest-gain feasible subchannel still free. Advances the cursor past the
// last client considered.
ScheduleDecision RoundRobinSchedule(const ChannelRealization& ch,
                                    ParticipationLedger& ledger,
                                    const SchedulerContext& ctx, int& cursor);

// Uniform random eligible subset of size min(K, #eligible), each with a
// uniformly random free feasible subchannel.
ScheduleDecision RandomSchedule(const ChannelRealization& ch,
                                ParticipationLedger& ledger,
                                const SchedulerContext& ctx, Rng& rng);

// Throws Error when a decision breaks any allocation constraint.
void CheckDecision(const ScheduleDecision& d, const ChannelRealization& ch,
                   const ParticipationLedger& ledger_after,
                   const SchedulerContext& ctx);

}  // namespace wpfl

#endif  // WPFL_SCHEDULER_H_
