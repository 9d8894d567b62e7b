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

// Trial-by-trial simulation of the heralded write/read sequence.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "dlcz/model.hpp"
#include "dlcz/montecarlo/sequence.hpp"
#include "dlcz/rng.hpp"

namespace dlcz {

enum class StokesDetector : std::uint8_t { D1, D2 };
enum class AntiStokesDetector : std::uint8_t { D3, D4 };

struct ClickRecord {
  std::int64_t cycle_index = 0;
  std::int64_t trial_index = 0;  // slot within the run
  std::optional<StokesDetector> herald;
  std::optional<AntiStokesDetector> readout;
  bool readout_is_background = false;  // diagnostic; estimators never see it
  double timestamp = 0.0;              // s from run start (end of the write pulse)

  friend bool operator==(const ClickRecord&, const ClickRecord&) = default;
};

struct RunOptions {
  unsigned workers = 1;
  bool keep_records = false;
  bool include_unheralded = false;  // also record trials without a herald
};

struct RunResult {
  CoincidenceCounts counts;    // counts.n_trials = write attempts
  std::int64_t slots = 0;      // grid slots spanned, attempted or skipped
  std::int64_t skipped_slots = 0;
  std::int64_t background_coincidences = 0;
  std::vector<ClickRecord> records;

  std::uint64_t heralds() const { return counts.s1 + counts.s2; }
};

namespace detail {

struct TrialKernel {
  double herald_probability;
  double signal;      // q_s = R(t) * read_eta
  double background;  // per-gate uncorrelated click probability
  OutcomeProbabilities werner;
  std::int64_t slots_per_run;
  std::int64_t slots_per_herald;
  double trial_period;
  double write_pulse;
};

inline void simulate_cycle(const TrialKernel& k, const SeedSpec& seed, std::int64_t cycle,
                           const RunOptions& opts, RunResult& out) {
  std::int64_t slot = 0;
  while (slot < k.slots_per_run) {
    auto stream = rng::trial_stream(seed, static_cast<std::uint64_t>(cycle),
                                    static_cast<std::uint64_t>(slot));
    ++out.counts.n_trials;
    const double stamp = static_cast<double>(slot) * k.trial_period + k.write_pulse;
    if (stream.uniform() >= k.herald_probability) {
      if (opts.keep_records && opts.include_unheralded)
        out.records.push_back({cycle, slot, std::nullopt, std::nullopt, false, stamp});
      ++slot;
      continue;
    }

    ClickRecord rec{cycle, slot, StokesDetector::D1, std::nullopt, false, stamp};
    const bool on_d1 = stream.uniform() < 0.5;
    if (on_d1) {
      ++out.counts.s1;
    } else {
      rec.herald = StokesDetector::D2;
      ++out.counts.s2;
    }

    const double u = stream.uniform();
    const double v = stream.uniform();
    std::optional<AntiStokesDetector> as;
    if (u < k.signal) {
      // conditional on the herald detector, D3 fires with 2 W_i3
      const double p3 = 2.0 * (on_d1 ? k.werner.d1d3 : k.werner.d2d3);
      as = v < p3 ? AntiStokesDetector::D3 : AntiStokesDetector::D4;
    } else if (u < k.signal + k.background) {
      as = v < 0.5 ? AntiStokesDetector::D3 : AntiStokesDetector::D4;
      rec.readout_is_background = true;
      ++out.background_coincidences;
    }
    if (as) {
      rec.readout = as;
      const bool d3 = *as == AntiStokesDetector::D3;
      if (on_d1)
        ++(d3 ? out.counts.c13 : out.counts.c14);
      else
        ++(d3 ? out.counts.c23 : out.counts.c24);
    }
    if (opts.keep_records) out.records.push_back(rec);

    const std::int64_t next = slot + k.slots_per_herald;
    out.skipped_slots += std::min(next, k.slots_per_run) - slot - 1;
    slot = next;
  }
  out.slots += k.slots_per_run;
}

inline void merge_into(RunResult& total, RunResult&& part) {
  total.counts += part.counts;
  total.slots += part.slots;
  total.skipped_slots += part.skipped_slots;
  total.background_coincidences += part.background_coincidences;
  total.records.insert(total.records.end(), std::make_move_iterator(part.records.begin()),
                       std::make_move_iterator(part.records.end()));
}

}  // namespace detail

/// Simulates `n_cycles` preparation+run cycles. Each trial heralds with
/// probability chi * write_eta on D1 or D2 (1/2 each). A herald stops the
/// write sequence; after the storage time the readout is drawn from
/// coincidence_probabilities. Counts are bit-identical for any worker count.
inline RunResult run_trials(const SequenceConfig& cfg, const SourceParams& source,
                            const DecayModel& dm, double write_eta, double read_eta,
                            const MeasurementSettings& set, std::int64_t n_cycles,
                            const SeedSpec& seed, const RunOptions& opts = {}) {
  checked(cfg);
  checked(dm);
  detail::require(n_cycles >= 1, "n_cycles must be at least 1");
  detail::require(detail::is_probability(write_eta), "write_eta must lie in [0, 1]");
  detail::require(detail::is_probability(read_eta), "read_eta must lie in [0, 1]");
  detail::require(source.chi >= 0.0 && source.chi < 1.0, "chi must lie in [0, 1)");

  RunResult total;
  detail::TrialKernel kernel{};
  kernel.herald_probability = source.chi * write_eta;
  kernel.slots_per_run = cfg.slots_per_run();
  kernel.slots_per_herald = cfg.slots_per_herald();
  kernel.trial_period = cfg.trial_period;
  kernel.write_pulse = cfg.write_pulse;

  if (source.chi == 0.0) {
    // Nothing can herald; the model's chi > 0 invariant does not apply.
    total.counts.n_trials = static_cast<std::uint64_t>(n_cycles * kernel.slots_per_run);
    total.slots = n_cycles * kernel.slots_per_run;
    if (opts.keep_records && opts.include_unheralded)
      for (std::int64_t c = 0; c < n_cycles; ++c)
        for (std::int64_t s = 0; s < kernel.slots_per_run; ++s)
          total.records.push_back({c, s, std::nullopt, std::nullopt, false,
                                   static_cast<double>(s) * cfg.trial_period + cfg.write_pulse});
    return total;
  }

  SourceParams sp = checked(source);
  sp.p_noise = std::min(sp.p_noise * cfg.gate() / cfg.read_pulse, 1.0);
  kernel.signal = retrieval_efficiency(cfg.storage_time, dm) * read_eta;
  kernel.background = effective_background(kernel.signal, sp.p_noise);
  kernel.werner =
      werner_projection(werner_mixing(sp, cfg.storage_time), sp.phase_write + sp.phase_read, set);

  const unsigned workers =
      static_cast<unsigned>(std::clamp<std::int64_t>(opts.workers, 1, n_cycles));
  if (workers == 1) {
    for (std::int64_t c = 0; c < n_cycles; ++c)
      detail::simulate_cycle(kernel, seed, c, opts, total);
    return total;
  }

  // Contiguous cycle blocks per worker, merged in block order.
  std::vector<RunResult> parts(workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        const std::int64_t begin = n_cycles * w / workers;
        const std::int64_t end = n_cycles * (w + 1) / workers;
        for (std::int64_t c = begin; c < end; ++c)
          detail::simulate_cycle(kernel, seed, c, opts, parts[w]);
      });
    }
  }
  for (auto& part : parts) detail::merge_into(total, std::move(part));
  return total;
}

// ---------------------------------------------------------------------------
// Record dump: one CSV line per record,
//   cycle,trial,herald,readout,background,t_ns
// with herald in {D1,D2,-}, readout in {D3,D4,-}, background in {0,1} and the
// timestamp rounded to integer nanoseconds.

inline constexpr const char* kClickRecordHeader = "cycle,trial,herald,readout,background,t_ns";

inline void write_click_records(std::ostream& os, std::span<const ClickRecord> records) {
  os << kClickRecordHeader << '\n';
  for (const auto& r : records) {
    os << r.cycle_index << ',' << r.trial_index << ','
       << (r.herald ? (*r.herald == StokesDetector::D1 ? "D1" : "D2") : "-") << ','
       << (r.readout ? (*r.readout == AntiStokesDetector::D3 ? "D3" : "D4") : "-") << ','
       << (r.readout_is_background ? 1 : 0) << ',' << std::llround(r.timestamp * 1e9) << '\n';
  }
}

inline std::vector<ClickRecord> read_click_records(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kClickRecordHeader)
    throw ValidationError("click-record stream lacks the expected header");
  std::vector<ClickRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1)
      f.push_back(line.substr(start, pos - start));
    f.push_back(line.substr(start));
    if (f.size() != 6) throw ValidationError("malformed click record: " + line);
    ClickRecord r;
    r.cycle_index = std::stoll(f[0]);
    r.trial_index = std::stoll(f[1]);
    if (f[2] == "D1") r.herald = StokesDetector::D1;
    else if (f[2] == "D2") r.herald = StokesDetector::D2;
    else if (f[2] != "-") throw ValidationError("bad herald field: " + f[2]);
    if (f[3] == "D3") r.readout = AntiStokesDetector::D3;
    else if (f[3] == "D4") r.readout = AntiStokesDetector::D4;
    else if (f[3] != "-") throw ValidationError("bad readout field: " + f[3]);
    r.readout_is_background = f[4] == "1";
    r.timestamp = static_cast<double>(std::stoll(f[5])) * 1e-9;
    out.push_back(r);
  }
  return out;
}

}  // namespace dlcz
