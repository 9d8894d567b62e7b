// Copyright 2026 The dlcz-sim Authors
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

#pragma once

#include <cstdint>

namespace dlcz {

/// Master seed of a simulation. Every trial draws from its own stream keyed
/// by (master, cycle, trial), so results never depend on scheduling.
struct SeedSpec {
  std::uint64_t master_seed = 0;

  /// Independent sub-seed for a labelled sub-experiment (a setting, a time).
  SeedSpec derive(std::uint64_t label) const;
};

namespace rng {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (mix64(b) + 0x632be59bd9b4e019ULL + (a << 6) + (a >> 2)));
}

/// Counter-based stream: splitmix64 over a per-trial key.
class TrialStream {
 public:
  constexpr explicit TrialStream(std::uint64_t key) : state_(key) {}

  constexpr std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

constexpr TrialStream trial_stream(const SeedSpec& seed, std::uint64_t cycle,
                                   std::uint64_t trial) {
  return TrialStream(combine(combine(mix64(seed.master_seed), cycle), trial));
}

}  // namespace rng

inline SeedSpec SeedSpec::derive(std::uint64_t label) const {
  return {rng::combine(rng::mix64(master_seed ^ 0xd1b54a32d192ed03ULL), label)};
}

}  // namespace dlcz
