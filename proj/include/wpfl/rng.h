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

#ifndef WPFL_RNG_H_
#define WPFL_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace wpfl {

using Rng = std::mt19937_64;

// Purpose tags for derived streams. Values are part of the reproducibility
// contract: changing one changes every recorded run.
enum class Stream : std::uint64_t {
  kTopology = 1,
  kChannel = 2,
  kSchedule = 3,
  kPartition = 4,
  kModelInit = 5,
  kClientBatch = 6,
  kUplinkNoise = 7,
  kUplinkBits = 8,
  kDownlinkBits = 9,
  kSynthetic = 10,
  kEstimation = 11,
  kWarmup = 12,
};

inline std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for an independent stream identified by (master, purpose, ids...).
// Streams for different (round, client) pairs never share state, so per-client
// work can run in any order and still reproduce bit-identically.
inline std::uint64_t DeriveSeed(std::uint64_t master, Stream purpose,
                                std::initializer_list<std::uint64_t> ids = {}) {
  std::uint64_t h = SplitMix64(master ^ 0x5851f42d4c957f2dULL);
  h = SplitMix64(h ^ static_cast<std::uint64_t>(purpose));
  for (std::uint64_t id : ids) h = SplitMix64(h ^ (id + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng MakeRng(std::uint64_t master, Stream purpose,
                   std::initializer_list<std::uint64_t> ids = {}) {
  return Rng(DeriveSeed(master, purpose, ids));
}

}  // namespace wpfl

#endif  // WPFL_RNG_H_
