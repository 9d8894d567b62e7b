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

// Closed-form model of a cavity-enhanced DLCZ atom-photon entanglement source:
// retrieval decay, detection budgets, polarization coincidence statistics,
// CHSH estimators and cavity arithmetic. Everything here is a pure function.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "dlcz/errors.hpp"

namespace dlcz {

inline constexpr double kSpeedOfLight = 2.998e8;  // m/s, vacuum
inline constexpr double kFiberLightSpeed = 2.0e8;  // m/s, group velocity in fiber
inline constexpr double kTsirelsonBound = 2.0 * std::numbers::sqrt2;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double degrees_to_radians(double deg) { return deg * std::numbers::pi / 180.0; }

inline double reduce_phase(double phase) {
  double r = std::fmod(phase, kTwoPi);
  return r < 0.0 ? r + kTwoPi : r;
}

/// Source of heralded atom-photon pairs. The two-photon state seen at the
/// analyzers is modeled as a Werner state whose mixing parameter decays with
/// storage time, plus a flat uncorrelated background in the read gate.
struct SourceParams {
  double chi = 0.02;           // pair-creation probability per write pulse
  double phase_write = 0.0;    // rad
  double phase_read = 0.0;     // rad
  double werner_p0 = 1.0;      // mixing parameter at zero delay
  double vis_tau_gauss = 1.0;  // s
  double vis_tau_exp = 1.0;    // s
  double p_noise = 1e-4;       // background click probability per read gate
};

/// Validated copy of `sp` with phases reduced into [0, 2pi).
inline SourceParams checked(SourceParams sp) {
  detail::require(sp.chi > 0.0 && sp.chi < 1.0, "chi must lie in (0, 1)");
  detail::require(detail::is_probability(sp.werner_p0), "werner_p0 must lie in [0, 1]");
  detail::require(sp.p_noise >= 0.0 && sp.p_noise < 1.0, "p_noise must lie in [0, 1)");
  detail::require(sp.vis_tau_gauss > 0.0 && sp.vis_tau_exp > 0.0,
                  "visibility decay constants must be positive");
  detail::require(std::isfinite(sp.phase_write) && std::isfinite(sp.phase_read),
                  "phases must be finite");
  sp.phase_write = reduce_phase(sp.phase_write);
  sp.phase_read = reduce_phase(sp.phase_read);
  return sp;
}

struct DecayModel {
  double r0 = 0.77;    // zero-delay intrinsic retrieval efficiency
  double tau0 = 1e-3;  // s
};

inline const DecayModel& checked(const DecayModel& m) {
  detail::require(detail::is_probability(m.r0), "r0 must lie in [0, 1]");
  detail::require(m.tau0 > 0.0 && std::isfinite(m.tau0), "tau0 must be positive");
  return m;
}

/// Loss budget of one detection channel (cavity escape through to the
/// detector). `eta_fc` is the optional telecom conversion stage.
struct DetectionChain {
  double t_ocm = 0.20;
  double cavity_loss = 0.13;
  double eta_smf = 0.71;
  double eta_filter = 0.56;
  double eta_mmf = 0.92;
  double eta_det = 0.68;
  double eta_fc = 1.0;

  /// The channel as operated in the 6 m ring-cavity experiment.
  static constexpr DetectionChain experimental() { return {}; }
  /// Short low-loss cavity, better fibers and superconducting detectors.
  static constexpr DetectionChain improved() {
    return {0.20, 0.005, 0.99, 0.98, 0.99, 0.95, 1.0};
  }
};

inline const DetectionChain& checked(const DetectionChain& c) {
  for (double f : {c.t_ocm, c.cavity_loss, c.eta_smf, c.eta_filter, c.eta_mmf, c.eta_det, c.eta_fc})
    detail::require(detail::is_probability(f), "detection-chain factors must lie in [0, 1]");
  detail::require(c.t_ocm + c.cavity_loss > 0.0, "t_ocm + cavity_loss must be positive");
  return c;
}

/// Polarization analysis angles in degrees. D1/D3 transmit along the stated
/// angle, D2/D4 along the orthogonal one.
struct MeasurementSettings {
  double theta_s = 0.0;
  double theta_as = 0.0;
};

/// CHSH order: (a, b), (a, b'), (a', b), (a', b').
inline constexpr std::array<MeasurementSettings, 4> canonical_chsh_settings() {
  return {{{0.0, 22.5}, {0.0, 67.5}, {45.0, 22.5}, {45.0, 67.5}}};
}

struct CoincidenceCounts {
  std::uint64_t c13 = 0;
  std::uint64_t c14 = 0;
  std::uint64_t c23 = 0;
  std::uint64_t c24 = 0;
  std::uint64_t s1 = 0;
  std::uint64_t s2 = 0;
  std::uint64_t n_trials = 0;

  std::uint64_t coincidences() const { return c13 + c14 + c23 + c24; }

  CoincidenceCounts& operator+=(const CoincidenceCounts& o) {
    c13 += o.c13;
    c14 += o.c14;
    c23 += o.c23;
    c24 += o.c24;
    s1 += o.s1;
    s2 += o.s2;
    n_trials += o.n_trials;
    return *this;
  }
  friend bool operator==(const CoincidenceCounts&, const CoincidenceCounts&) = default;
};

inline const CoincidenceCounts& checked(const CoincidenceCounts& c) {
  detail::require(c.c13 + c.c14 <= c.s1, "coincidences at D1 exceed D1 singles");
  detail::require(c.c23 + c.c24 <= c.s2, "coincidences at D2 exceed D2 singles");
  detail::require(c.s1 + c.s2 <= c.n_trials, "more heralds than trials");
  return c;
}

struct CavityParams {
  double length = 6.0;  // m, ring round trip
  double finesse_left = 16.9;
  double finesse_right = 17.0;
};

/// A point estimate with its one-sigma standard error.
struct Estimate {
  double value = 0.0;
  double sigma = 0.0;
};

// ---------------------------------------------------------------------------
// Retrieval and detection

/// R(t) = R0 (exp(-t^2/tau0^2) + exp(-t/tau0)) / 2.
inline double retrieval_efficiency(double t, const DecayModel& m) {
  checked(m);
  detail::require(t >= 0.0, "storage time must be non-negative");
  const double x = t / m.tau0;
  return m.r0 * 0.5 * (std::exp(-x * x) + std::exp(-x));
}

inline double escape_efficiency(const DetectionChain& chain) {
  checked(chain);
  return chain.t_ocm / (chain.t_ocm + chain.cavity_loss);
}

/// Product of every stage. The conversion stage is only counted for a
/// telecom node.
inline double total_detection_efficiency(const DetectionChain& chain,
                                         bool include_frequency_conversion = false) {
  double eta = escape_efficiency(chain) * chain.eta_smf * chain.eta_filter * chain.eta_mmf *
               chain.eta_det;
  if (include_frequency_conversion) eta *= chain.eta_fc;
  return eta;
}

// ---------------------------------------------------------------------------
// Polarization statistics

/// Joint outcome probabilities for the four detector pairs.
struct OutcomeProbabilities {
  double d1d3 = 0.0;
  double d1d4 = 0.0;
  double d2d3 = 0.0;
  double d2d4 = 0.0;

  double total() const { return d1d3 + d1d4 + d2d3 + d2d4; }
  double correlation() const { return (d1d3 + d2d4 - d1d4 - d2d3) / total(); }
};

/// Werner mixing parameter after storage time t.
inline double werner_mixing(const SourceParams& sp, double t) {
  detail::require(t >= 0.0, "storage time must be non-negative");
  const double g = t / sp.vis_tau_gauss;
  return sp.werner_p0 * 0.5 * (std::exp(-g * g) + std::exp(-t / sp.vis_tau_exp));
}

/// Polarization correlation <sigma(theta_s) sigma(theta_as)> of the pure
/// state |HH> + e^{i phase}|VV> under linear analyzers.
inline double ideal_correlation(double phase, const MeasurementSettings& set) {
  const double a = 2.0 * degrees_to_radians(set.theta_s);
  const double b = 2.0 * degrees_to_radians(set.theta_as);
  return std::cos(a) * std::cos(b) + std::cos(phase) * std::sin(a) * std::sin(b);
}

/// Projection probabilities of the normalized Werner state
/// p |Phi><Phi| + (1 - p) I/4 onto the four detector pairs.
inline OutcomeProbabilities werner_projection(double p, double phase,
                                              const MeasurementSettings& set) {
  const double c = p * ideal_correlation(phase, set);
  const double same = 0.25 * (1.0 + c);
  const double cross = 0.25 * (1.0 - c);
  return {same, cross, cross, same};
}

/// Background actually added per herald: additive with the correlated
/// retrieval, clipped so that the per-herald click probability stays <= 1.
inline double effective_background(double q_signal, double p_noise) {
  return std::min(p_noise, std::max(0.0, 1.0 - q_signal));
}

/// Per-herald probabilities P_ij = q_s W_ij + (p_N/2)(1/2), with
/// q_s = R(t) * readout_eta.
inline OutcomeProbabilities coincidence_probabilities(const SourceParams& source,
                                                      const DecayModel& dm, double t,
                                                      double readout_eta,
                                                      const MeasurementSettings& set) {
  const SourceParams sp = checked(source);
  detail::require(detail::is_probability(readout_eta), "readout_eta must lie in [0, 1]");
  const double q = retrieval_efficiency(t, dm) * readout_eta;
  const double bg = effective_background(q, sp.p_noise);
  const OutcomeProbabilities w =
      werner_projection(werner_mixing(sp, t), sp.phase_write + sp.phase_read, set);
  const double flat = 0.25 * bg;
  return {q * w.d1d3 + flat, q * w.d1d4 + flat, q * w.d2d3 + flat, q * w.d2d4 + flat};
}

// ---------------------------------------------------------------------------
// Estimators

namespace detail {

// Poisson propagation for E = (A - B)/(A + B).
inline Estimate correlation_from(double same, double cross) {
  const double n = same + cross;
  if (n <= 0.0) throw InsufficientStatistics("no coincidences: correlation undefined");
  return {(same - cross) / n, 2.0 * std::sqrt(same * cross / (n * n * n))};
}

// c / (eta s) with Poisson errors on both counts; a zero numerator is given
// the one-count error bar.
inline Estimate ratio_from(double c, double s, double eta) {
  if (s <= 0.0) throw InsufficientStatistics("no heralds: retrieval efficiency undefined");
  const double value = c / (eta * s);
  const double var = std::max(c, 1.0) / (eta * eta * s * s) + c * c / (eta * eta * s * s * s);
  return {value, std::sqrt(var)};
}

}  // namespace detail

inline Estimate correlation_estimate(const CoincidenceCounts& counts) {
  return detail::correlation_from(static_cast<double>(counts.c13 + counts.c24),
                                  static_cast<double>(counts.c14 + counts.c23));
}

/// E = (C13 + C24 - C14 - C23) / (C13 + C24 + C14 + C23).
inline double correlation_E(const CoincidenceCounts& counts) {
  return correlation_estimate(counts).value;
}

/// S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')|.
inline double bell_parameter(double e1, double e2, double e3, double e4) {
  for (double e : {e1, e2, e3, e4})
    detail::require(e >= -1.0 && e <= 1.0, "correlation values must lie in [-1, 1]");
  return std::abs(e1 - e2 + e3 + e4);
}

inline double bell_parameter(const std::array<double, 4>& e) {
  return bell_parameter(e[0], e[1], e[2], e[3]);
}

/// S with uncorrelated errors propagated from four measured correlations.
inline Estimate bell_estimate(const std::array<Estimate, 4>& e) {
  double var = 0.0;
  for (const auto& x : e) var += x.sigma * x.sigma;
  return {bell_parameter(e[0].value, e[1].value, e[2].value, e[3].value), std::sqrt(var)};
}

/// Werner-state fidelity implied by a CHSH value: F = (3 S / 2 sqrt2 + 1) / 4.
inline double fidelity_from_bell(double s) {
  detail::require(s >= 0.0 && s <= kTsirelsonBound + 1e-12,
                  "Bell parameter must lie in [0, 2 sqrt 2]");
  return (3.0 * s / kTsirelsonBound + 1.0) / 4.0;
}

struct RetrievalEstimates {
  Estimate qubit;
  Estimate left;
  Estimate right;
};

/// Intrinsic retrieval efficiencies from counts taken at theta_s = theta_as = 0.
inline RetrievalEstimates estimate_intrinsic_retrieval(const CoincidenceCounts& counts,
                                                       double eta_td) {
  checked(counts);
  detail::require(eta_td > 0.0 && eta_td <= 1.0, "eta_td must lie in (0, 1]");
  if (counts.s1 == 0 || counts.s2 == 0)
    throw InsufficientStatistics("retrieval estimate needs heralds on both Stokes detectors");
  const auto d = [](std::uint64_t x) { return static_cast<double>(x); };
  return {detail::ratio_from(d(counts.c13 + counts.c24), d(counts.s1 + counts.s2), eta_td),
          detail::ratio_from(d(counts.c13), d(counts.s1), eta_td),
          detail::ratio_from(d(counts.c24), d(counts.s2), eta_td)};
}

// ---------------------------------------------------------------------------
// Expected values of the estimators under the model

inline double expected_correlation(const SourceParams& sp, const DecayModel& dm, double t,
                                   double readout_eta, const MeasurementSettings& set) {
  return coincidence_probabilities(sp, dm, t, readout_eta, set).correlation();
}

inline double expected_bell_parameter(const SourceParams& sp, const DecayModel& dm, double t,
                                      double readout_eta) {
  std::array<double, 4> e{};
  const auto settings = canonical_chsh_settings();
  for (std::size_t i = 0; i < 4; ++i)
    e[i] = expected_correlation(sp, dm, t, readout_eta, settings[i]);
  return bell_parameter(e);
}

struct ExpectedRetrieval {
  double qubit = 0.0;
  double left = 0.0;
  double right = 0.0;
};

/// What estimate_intrinsic_retrieval converges to. The Stokes marginal is
/// 1/2 per detector, so each conditional rate is 2 P_ij / eta.
inline ExpectedRetrieval expected_retrieval_estimates(const SourceParams& sp,
                                                      const DecayModel& dm, double t,
                                                      double readout_eta) {
  detail::require(readout_eta > 0.0, "readout_eta must be positive");
  const auto p = coincidence_probabilities(sp, dm, t, readout_eta, {0.0, 0.0});
  return {(p.d1d3 + p.d2d4) / readout_eta, 2.0 * p.d1d3 / readout_eta,
          2.0 * p.d2d4 / readout_eta};
}

// ---------------------------------------------------------------------------
// Cavity

/// Free spectral range c / L of a ring cavity (L is the round trip).
inline double cavity_fsr(const CavityParams& cav) {
  detail::require(cav.length > 0.0, "cavity length must be positive");
  return kSpeedOfLight / cav.length;
}

}  // namespace dlcz
