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

#include <array>
#include <bit>
#include <optional>
#include <span>
#include <vector>

#include "dlcz/model.hpp"
#include "dlcz/montecarlo/engine.hpp"

namespace dlcz {

/// Everything run_trials needs except the storage time and the analyzer
/// setting, which the sweep supplies.
struct ExperimentSpec {
  SequenceConfig sequence;
  SourceParams source;
  DecayModel decay;
  double write_eta = 0.15;
  double read_eta = 0.15;
  std::int64_t n_cycles = 1;
  SeedSpec seed;
  RunOptions run;
};

struct SweepRow {
  double t = 0.0;
  std::optional<CoincidenceCounts> retrieval_counts;
  std::optional<RetrievalEstimates> retrieval;
  std::optional<std::array<CoincidenceCounts, 4>> bell_counts;
  std::optional<std::array<Estimate, 4>> correlations;
  std::optional<Estimate> bell;
};

struct SweepOptions {
  bool efficiency = true;  // run at theta_s = theta_as = 0
  bool bell = true;        // run the four canonical CHSH settings
};

/// Seed of one (storage time, setting) sub-experiment. Keyed on the value of
/// t so a row does not depend on its position in the sweep.
inline SeedSpec sweep_seed(const SeedSpec& master, double t, std::uint64_t setting) {
  return master.derive(std::bit_cast<std::uint64_t>(t)).derive(setting);
}

inline SweepRow run_storage_point(const ExperimentSpec& spec, double t,
                                  const SweepOptions& opts = {}) {
  detail::require(t >= 0.0, "storage times must be non-negative");
  SequenceConfig cfg = spec.sequence;
  cfg.storage_time = t;
  const auto run = [&](const MeasurementSettings& set, std::uint64_t label) {
    return run_trials(cfg, spec.source, spec.decay, spec.write_eta, spec.read_eta, set,
                      spec.n_cycles, sweep_seed(spec.seed, t, label), spec.run);
  };

  SweepRow row;
  row.t = t;
  if (opts.efficiency) {
    row.retrieval_counts = run({0.0, 0.0}, 0).counts;
    row.retrieval = estimate_intrinsic_retrieval(*row.retrieval_counts, spec.read_eta);
  }
  if (opts.bell) {
    const auto settings = canonical_chsh_settings();
    std::array<CoincidenceCounts, 4> counts;
    std::array<Estimate, 4> e;
    for (std::size_t i = 0; i < 4; ++i) {
      counts[i] = run(settings[i], i + 1).counts;
      e[i] = correlation_estimate(counts[i]);
    }
    row.bell_counts = counts;
    row.correlations = e;
    row.bell = bell_estimate(e);
  }
  return row;
}

/// One row per storage time, each computed exactly as run_storage_point.
inline std::vector<SweepRow> sweep_storage_time(std::span<const double> ts,
                                                const ExperimentSpec& spec,
                                                const SweepOptions& opts = {}) {
  detail::require(!ts.empty(), "storage-time list is empty");
  std::vector<SweepRow> rows;
  rows.reserve(ts.size());
  for (double t : ts) rows.push_back(run_storage_point(spec, t, opts));
  return rows;
}

/// Cycles needed for roughly `attempts` write attempts. Each herald consumes
/// slots_per_herald() grid slots, so long storage times need more cycles.
inline std::int64_t cycles_for_attempts(const SequenceConfig& cfg, double herald_probability,
                                        double attempts) {
  detail::require(herald_probability >= 0.0 && herald_probability <= 1.0,
                  "herald probability must lie in [0, 1]");
  const double slots_per_attempt =
      1.0 + herald_probability * static_cast<double>(cfg.slots_per_herald() - 1);
  const double per_cycle = static_cast<double>(cfg.slots_per_run()) / slots_per_attempt;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(attempts / per_cycle - 1e-9)));
}

/// Cycles needed for roughly `heralds` heralds at this configuration.
inline std::int64_t cycles_for_heralds(const SequenceConfig& cfg, double herald_probability,
                                       double heralds) {
  detail::require(herald_probability > 0.0, "herald probability must be positive");
  const double slots_per_herald_event =
      1.0 / herald_probability + static_cast<double>(cfg.slots_per_herald() - 1);
  const double per_cycle = static_cast<double>(cfg.slots_per_run()) / slots_per_herald_event;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(heralds / per_cycle)));
}

}  // namespace dlcz
