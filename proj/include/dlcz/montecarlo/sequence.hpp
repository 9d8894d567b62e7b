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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

#include "dlcz/errors.hpp"

namespace dlcz {

/// Timing of the experimental state machine. A cycle is an atom-preparation
/// phase followed by a run of write/read trials on a fixed slot grid.
struct SequenceConfig {
  double prep_duration = 42e-3;   // s
  double run_duration = 8e-3;     // s
  double write_pulse = 300e-9;    // s
  double read_pulse = 300e-9;     // s
  double clean_pulse = 200e-9;    // s
  double post_read_gap = 1300e-9; // s, read-pulse start to cleaning-pulse start
  double trial_period = 2000e-9;  // s, write-to-write spacing
  double storage_time = 0.0;      // s, write end to read start on a heralded trial
  // Coincidence gate. Unset means the read pulse itself; the background
  // probability scales with gate / read_pulse.
  std::optional<double> gate_width;

  double cycle_duration() const { return prep_duration + run_duration; }

  std::int64_t slots_per_run() const {
    return static_cast<std::int64_t>(std::floor(run_duration / trial_period + 1e-9));
  }

  double gate() const { return gate_width.value_or(read_pulse); }

  /// Time a heralded trial keeps the ensemble busy, from its write start to
  /// the end of the cleaning pulse.
  double heralded_busy_time() const {
    return write_pulse + storage_time + post_read_gap + clean_pulse;
  }

  /// Grid slots consumed by one heralded trial (itself included).
  std::int64_t slots_per_herald() const {
    const double n = std::ceil(heralded_busy_time() / trial_period - 1e-9);
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(n));
  }

  /// Number of whole cycles covering `seconds` of experiment.
  std::int64_t cycles_in(double seconds) const {
    return static_cast<std::int64_t>(std::llround(seconds / cycle_duration()));
  }
};

inline const SequenceConfig& checked(const SequenceConfig& c) {
  for (double d : {c.prep_duration, c.run_duration, c.write_pulse, c.read_pulse, c.clean_pulse,
                   c.post_read_gap, c.trial_period})
    detail::require(d > 0.0 && std::isfinite(d), "sequence durations must be positive");
  detail::require(c.storage_time >= 0.0 && std::isfinite(c.storage_time),
                  "storage time must be non-negative");
  detail::require(c.trial_period >= c.write_pulse, "trial period shorter than the write pulse");
  detail::require(c.read_pulse <= c.post_read_gap, "read pulse overlaps the cleaning pulse");
  detail::require(c.slots_per_run() >= 1, "run shorter than one trial period");
  if (c.gate_width) detail::require(*c.gate_width > 0.0, "gate width must be positive");
  return c;
}

}  // namespace dlcz
