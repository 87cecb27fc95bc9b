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

#include "wpfl/scheduler.h"

#include <algorithm>
#include <numeric>
#include <string>

namespace wpfl {
namespace {

ScheduleDecision EmptyDecision(int n_clients) {
  ScheduleDecision d;
  d.assignment.assign(n_clients, -1);
  d.power_w.assign(n_clients, 0.0);
  return d;
}

void Commit(ScheduleDecision& d, ParticipationLedger& ledger,
            const SchedulerContext& ctx) {
  d.selected.clear();
  for (int n = 0; n < static_cast<int>(d.assignment.size()); ++n) {
    if (d.assignment[n] < 0) continue;
    d.selected.push_back(n);
    d.power_w[n] = ctx.radio->ClientPowerWatts();
    ++ledger.uploads_used[n];
  }
}

}  // namespace

std::vector<double> ScheduleDecision::SelectedRho(
    const ChannelRealization& ch) const {
  std::vector<double> out;
  out.reserve(selected.size());
  for (int n : selected) out.push_back(ch.uplink_rho[ch.At(n, assignment[n])]);
  return out;
}

std::vector<int> EligibleClients(const ParticipationLedger& ledger, int t0) {
  std::vector<int> out;
  for (int n = 0; n < ledger.n_clients(); ++n) {
    if (ledger.uploads_used[n] < t0) out.push_back(n);
  }
  return out;
}

bool IsRateFeasible(const ChannelRealization& ch, int client, int subchannel,
                    double min_rate) {
  return ch.uplink_rate[ch.At(client, subchannel)] >= min_rate;
}

CostMatrix BuildCostMatrix(const ChannelRealization& ch,
                           const std::vector<int>& eligible, double min_rate) {
  CostMatrix costs(ch.n_clients, ch.n_subchannels);
  for (int n : eligible) {
    for (int k = 0; k < ch.n_subchannels; ++k) {
      if (IsRateFeasible(ch, n, k, min_rate))
        costs.Set(n, k, ch.uplink_rho[ch.At(n, k)]);
    }
  }
  return costs;
}

ScheduleDecision ScheduleRound(const ChannelRealization& ch,
                               ParticipationLedger& ledger,
                               const SchedulerContext& ctx) {
  ScheduleDecision d = EmptyDecision(ch.n_clients);
  const std::vector<int> eligible = EligibleClients(ledger, ctx.t0);
  if (eligible.empty()) return d;
  const Matching m = SolveAssignment(BuildCostMatrix(ch, eligible, ctx.min_rate));
  d.assignment = m.row_to_col;
  Commit(d, ledger, ctx);
  return d;
}

ScheduleDecision RoundRobinSchedule(const ChannelRealization& ch,
                                    ParticipationLedger& ledger,
                                    const SchedulerContext& ctx, int& cursor) {
  ScheduleDecision d = EmptyDecision(ch.n_clients);
  const int n_clients = ch.n_clients;
  std::vector<char> taken(ch.n_subchannels, 0);
  int considered = 0;
  int steps = 0;
  int pos = ((cursor % n_clients) + n_clients) % n_clients;
  while (considered < ch.n_subchannels && steps < n_clients) {
    const int n = pos;
    pos = (pos + 1) % n_clients;
    ++steps;
    if (ledger.uploads_used[n] >= ctx.t0) continue;
    ++considered;
    int best = -1;
    for (int k = 0; k < ch.n_subchannels; ++k) {
      if (taken[k] || !IsRateFeasible(ch, n, k, ctx.min_rate)) continue;
      if (best < 0 || ch.uplink_gain[ch.At(n, k)] > ch.uplink_gain[ch.At(n, best)])
        best = k;
    }
    if (best >= 0) {
      taken[best] = 1;
      d.assignment[n] = best;
    }
  }
  cursor = pos;
  Commit(d, ledger, ctx);
  return d;
}

ScheduleDecision RandomSchedule(const ChannelRealization& ch,
                                ParticipationLedger& ledger,
                                const SchedulerContext& ctx, Rng& rng) {
  ScheduleDecision d = EmptyDecision(ch.n_clients);
  std::vector<int> eligible = EligibleClients(ledger, ctx.t0);
  std::shuffle(eligible.begin(), eligible.end(), rng);
  const std::size_t count =
      std::min<std::size_t>(eligible.size(), ch.n_subchannels);
  std::vector<char> taken(ch.n_subchannels, 0);
  for (std::size_t i = 0; i < count; ++i) {
    const int n = eligible[i];
    std::vector<int> options;
    for (int k = 0; k < ch.n_subchannels; ++k) {
      if (!taken[k] && IsRateFeasible(ch, n, k, ctx.min_rate))
        options.push_back(k);
    }
    if (options.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
    const int k = options[pick(rng)];
    taken[k] = 1;
    d.assignment[n] = k;
  }
  Commit(d, ledger, ctx);
  return d;
}

void CheckDecision(const ScheduleDecision& d, const ChannelRealization& ch,
                   const ParticipationLedger& ledger_after,
                   const SchedulerContext& ctx) {
  std::vector<int> users(ch.n_subchannels, 0);
  for (int n = 0; n < ch.n_clients; ++n) {
    const int k = d.assignment[n];
    if (k < 0) {
      if (d.power_w[n] != 0) throw Error("unselected client transmits");
      continue;
    }
    if (++users[k] > 1)
      throw Error("subchannel " + std::to_string(k) + " assigned twice");
    if (d.power_w[n] > ctx.radio->ClientPowerWatts() * (1 + 1e-12))
      throw Error("power cap exceeded");
    if (!IsRateFeasible(ch, n, k, ctx.min_rate))
      throw Error("rate constraint violated");
  }
  for (int used : ledger_after.uploads_used) {
    if (used > ctx.t0) throw Error("upload budget exceeded");
  }
}

}  // namespace wpfl
