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

// Poisson parametric bootstrap of the CHSH and retrieval estimators.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "dlcz/model.hpp"
#include "dlcz/rng.hpp"

namespace dlcz {

struct BootstrapInput {
  std::vector<CoincidenceCounts> correlation;  // one entry per setting; 4 gives S
  std::optional<CoincidenceCounts> retrieval;  // counts at theta_s = theta_as = 0
  double eta_td = 0.0;                         // required with `retrieval`
};

struct BootstrapErrors {
  std::vector<double> correlation;
  std::optional<double> bell;
  std::optional<double> r_qubit;
  std::optional<double> r_left;
  std::optional<double> r_right;
  int accepted = 0;
  int redraws = 0;
};

namespace detail {

class RunningStd {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  double stddev() const { return n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1)) : 0.0; }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline std::uint64_t poisson_draw(std::mt19937_64& gen, std::uint64_t mean) {
  if (mean == 0) return 0;
  std::poisson_distribution<std::uint64_t> dist(static_cast<double>(mean));
  return dist(gen);
}

inline CoincidenceCounts poisson_resample(std::mt19937_64& gen, const CoincidenceCounts& c) {
  CoincidenceCounts r;
  r.c13 = poisson_draw(gen, c.c13);
  r.c14 = poisson_draw(gen, c.c14);
  r.c23 = poisson_draw(gen, c.c23);
  r.c24 = poisson_draw(gen, c.c24);
  r.s1 = poisson_draw(gen, c.s1);
  r.s2 = poisson_draw(gen, c.s2);
  r.n_trials = c.n_trials;
  return r;
}

}  // namespace detail

/// Resamples every count as an independent Poisson variate with mean equal
/// to the observed count, recomputes each estimator and reports the sample
/// standard deviation. Resamples on which an estimator is undefined are
/// redrawn, up to 10 * n_resamples attempts in total.
inline BootstrapErrors bootstrap_errors(const BootstrapInput& in, int n_resamples,
                                        const SeedSpec& seed) {
  detail::require(n_resamples >= 100, "bootstrap needs at least 100 resamples");
  detail::require(!in.correlation.empty() || in.retrieval,
                  "bootstrap needs at least one set of counts");
  if (in.retrieval)
    detail::require(in.eta_td > 0.0 && in.eta_td <= 1.0, "eta_td must lie in (0, 1]");

  std::mt19937_64 gen(seed.derive(0xb007).master_seed);
  std::vector<detail::RunningStd> e_std(in.correlation.size());
  detail::RunningStd s_std, rq_std, rl_std, rr_std;
  const bool with_bell = in.correlation.size() == 4;

  BootstrapErrors out;
  const int max_attempts = 10 * n_resamples;
  int attempts = 0;
  std::vector<double> e(in.correlation.size());
  while (out.accepted < n_resamples) {
    if (attempts++ >= max_attempts)
      throw NumericalFailure("bootstrap: too many undefined resamples");
    bool ok = true;
    for (std::size_t i = 0; i < in.correlation.size() && ok; ++i) {
      const auto r = detail::poisson_resample(gen, in.correlation[i]);
      const double same = static_cast<double>(r.c13 + r.c24);
      const double cross = static_cast<double>(r.c14 + r.c23);
      if (same + cross <= 0.0) ok = false;
      else e[i] = (same - cross) / (same + cross);
    }
    double rq = 0, rl = 0, rr = 0;
    if (ok && in.retrieval) {
      const auto r = detail::poisson_resample(gen, *in.retrieval);
      if (r.s1 == 0 || r.s2 == 0) {
        ok = false;
      } else {
        const auto d = [](std::uint64_t x) { return static_cast<double>(x); };
        rq = d(r.c13 + r.c24) / (in.eta_td * d(r.s1 + r.s2));
        rl = d(r.c13) / (in.eta_td * d(r.s1));
        rr = d(r.c24) / (in.eta_td * d(r.s2));
      }
    }
    if (!ok) {
      ++out.redraws;
      continue;
    }
    for (std::size_t i = 0; i < e.size(); ++i) e_std[i].add(e[i]);
    if (with_bell) s_std.add(std::abs(e[0] - e[1] + e[2] + e[3]));
    if (in.retrieval) {
      rq_std.add(rq);
      rl_std.add(rl);
      rr_std.add(rr);
    }
    ++out.accepted;
  }

  for (const auto& s : e_std) out.correlation.push_back(s.stddev());
  if (with_bell) out.bell = s_std.stddev();
  if (in.retrieval) {
    out.r_qubit = rq_std.stddev();
    out.r_left = rl_std.stddev();
    out.r_right = rr_std.stddev();
  }
  return out;
}

}  // namespace dlcz
