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

// Rate of a nested, multiplexed DLCZ repeater built from two-photon
// interference links:
//
//   rate = P0^(N) * prod_j P_j * P_pr / T_cc
//
// The printed model leaves two conventions open; both are selectable and
// reported alongside every result.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dlcz/errors.hpp"
#include "dlcz/model.hpp"

namespace dlcz {

enum class LinkConvention {
  L_over_n,         // elementary link L0 = L / n
  L_over_2_pow_n,   // L0 = L / 2^n, i.e. 2^n links for n swap levels
};

enum class PrExponent {
  literal_L_over_tau,  // exp(-L/tau0) with L in km and tau0 in s; not dimensionally sound
  total_elapsed_time,  // exp(-t_n/tau0)
  flight_time,         // exp(-(L/c_fiber)/tau0)
};

enum class Grid { log, linear };

inline constexpr std::string_view to_string(LinkConvention c) {
  return c == LinkConvention::L_over_n ? "L_over_n" : "L_over_2_pow_n";
}

inline constexpr std::string_view to_string(PrExponent e) {
  switch (e) {
    case PrExponent::literal_L_over_tau: return "literal_L_over_tau";
    case PrExponent::total_elapsed_time: return "total_elapsed_time";
    case PrExponent::flight_time: return "flight_time";
  }
  return "";
}

inline LinkConvention parse_link_convention(std::string_view s) {
  if (s == "L_over_n") return LinkConvention::L_over_n;
  if (s == "L_over_2_pow_n") return LinkConvention::L_over_2_pow_n;
  throw ValidationError("unknown link convention: " + std::string(s));
}

inline PrExponent parse_pr_exponent(std::string_view s) {
  if (s == "literal_L_over_tau") return PrExponent::literal_L_over_tau;
  if (s == "total_elapsed_time") return PrExponent::total_elapsed_time;
  if (s == "flight_time") return PrExponent::flight_time;
  throw ValidationError("unknown P_pr interpretation: " + std::string(s));
}

inline constexpr bool is_physical(PrExponent e) { return e != PrExponent::literal_L_over_tau; }

struct RepeaterParams {
  int nest_level = 4;
  std::int64_t mode_count = 1000;
  double memory_lifetime = 16.0;  // s
  double eta_td = 0.90;
  double eta_fc = 0.33;
  double chi = 0.02;
  double attenuation_length = 22.0;  // km
  double r0 = 0.77;
  double fiber_speed = kFiberLightSpeed;  // m/s
  LinkConvention link_convention = LinkConvention::L_over_n;
  PrExponent pr_exponent = PrExponent::total_elapsed_time;
};

inline const RepeaterParams& checked(const RepeaterParams& p) {
  detail::require(p.nest_level >= 1, "nest level must be at least 1");
  detail::require(p.mode_count >= 1, "mode count must be at least 1");
  for (double f : {p.eta_td, p.eta_fc, p.chi, p.r0})
    detail::require(detail::is_probability(f), "repeater efficiencies must lie in [0, 1]");
  detail::require(p.memory_lifetime > 0.0, "memory lifetime must be positive");
  detail::require(p.attenuation_length > 0.0, "attenuation length must be positive");
  detail::require(p.fiber_speed > 0.0, "fiber speed must be positive");
  return p;
}

// Probabilities below this are treated as underflow.
inline constexpr double kUnderflowThreshold = 1e-300;

enum class RateStatus { ok, link_unreachable, chain_collapsed, rate_underflow };

inline constexpr std::string_view to_string(RateStatus s) {
  switch (s) {
    case RateStatus::ok: return "ok";
    case RateStatus::link_unreachable: return "link_unreachable";
    case RateStatus::chain_collapsed: return "chain_collapsed";
    case RateStatus::rate_underflow: return "rate_underflow";
  }
  return "";
}

struct ElementaryLink {
  double link_length = 0.0;    // km
  double comm_time = 0.0;      // s, T_cc
  double p0 = 0.0;
  double p0_multiplexed = 0.0; // exact 1 - (1 - P0)^N
  double p0_shortcut = 0.0;    // N P0
  double t0 = 0.0;             // s
  bool reachable = false;
};

inline double elementary_link_length(const RepeaterParams& p, double distance_km) {
  return p.link_convention == LinkConvention::L_over_n
             ? distance_km / p.nest_level
             : std::ldexp(distance_km, -p.nest_level);
}

/// P0 = chi^2 exp(-L0/L_att) eta_fc^2 eta_td^2 / 2 and its N-mode multiplexed
/// success probability. Evaluated in log space; an underflowing P0 yields an
/// unreachable link instead of a division by zero.
inline ElementaryLink elementary_probability(const RepeaterParams& params, double distance_km) {
  const auto& p = checked(params);
  detail::require(distance_km > 0.0, "distance must be positive");
  ElementaryLink link;
  link.link_length = elementary_link_length(p, distance_km);
  link.comm_time = link.link_length * 1e3 / p.fiber_speed;
  const double log_p0 = 2.0 * std::log(p.chi) - link.link_length / p.attenuation_length +
                        2.0 * std::log(p.eta_fc) + 2.0 * std::log(p.eta_td) - std::log(2.0);
  if (!(log_p0 > std::log(kUnderflowThreshold))) return link;
  link.p0 = std::exp(log_p0);
  link.p0_multiplexed = -std::expm1(static_cast<double>(p.mode_count) * std::log1p(-link.p0));
  link.p0_shortcut = static_cast<double>(p.mode_count) * link.p0;
  link.t0 = link.comm_time / link.p0_multiplexed;
  link.reachable = link.p0_multiplexed > kUnderflowThreshold && std::isfinite(link.t0);
  return link;
}

struct SwapLevel {
  double probability = 0.0;
  double time = 0.0;  // s
};

struct SwapChain {
  std::vector<SwapLevel> levels;   // j = 1..n; truncated at a collapse
  std::optional<int> collapsed_at; // level j whose probability underflowed
};

/// P_j = (R0 exp(-t_{j-1}/tau0))^2 eta_td^2 / 2 and t_j = t_{j-1} / P_j.
inline SwapChain swap_chain(const RepeaterParams& params, double t0) {
  const auto& p = checked(params);
  detail::require(t0 > 0.0, "t0 must be positive");
  SwapChain chain;
  double t_prev = t0;
  const double log_base = 2.0 * std::log(p.r0) + 2.0 * std::log(p.eta_td) - std::log(2.0);
  for (int j = 1; j <= p.nest_level; ++j) {
    const double log_pj = log_base - 2.0 * t_prev / p.memory_lifetime;
    if (!(log_pj > std::log(kUnderflowThreshold))) {
      chain.collapsed_at = j;
      return chain;
    }
    const double pj = std::exp(log_pj);
    const double tj = t_prev / pj;
    if (!std::isfinite(tj)) {
      chain.collapsed_at = j;
      return chain;
    }
    chain.levels.push_back({pj, tj});
    t_prev = tj;
  }
  return chain;
}

struct RatePoint {
  double distance_km = 0.0;
  double rate = 0.0;  // per second
  RateStatus status = RateStatus::ok;
  ElementaryLink link;
  SwapChain chain;
  double p_pr = 0.0;
};

inline double log_final_pair_probability(const RepeaterParams& p, double distance_km,
                                         double t_last) {
  double exponent = 0.0;
  switch (p.pr_exponent) {
    case PrExponent::literal_L_over_tau: exponent = distance_km / p.memory_lifetime; break;
    case PrExponent::total_elapsed_time: exponent = t_last / p.memory_lifetime; break;
    case PrExponent::flight_time:
      exponent = distance_km * 1e3 / p.fiber_speed / p.memory_lifetime;
      break;
  }
  return std::log(0.5 * p.r0 * p.r0) - 2.0 * exponent;
}

/// P_pr = (R0 exp(-x))^2 / 2 with x chosen by the configured interpretation.
inline double final_pair_probability(const RepeaterParams& p, double distance_km,
                                     double t_last) {
  return std::exp(log_final_pair_probability(p, distance_km, t_last));
}

inline RatePoint repeater_rate(const RepeaterParams& params, double distance_km) {
  const auto& p = checked(params);
  RatePoint pt;
  pt.distance_km = distance_km;
  pt.link = elementary_probability(p, distance_km);
  if (!pt.link.reachable) {
    pt.status = RateStatus::link_unreachable;
    return pt;
  }
  if (p.r0 == 0.0) {
    pt.status = RateStatus::chain_collapsed;
    pt.chain.collapsed_at = 1;
    return pt;
  }
  pt.chain = swap_chain(p, pt.link.t0);
  if (pt.chain.collapsed_at) {
    pt.status = RateStatus::chain_collapsed;
    return pt;
  }
  const double log_ppr = log_final_pair_probability(p, distance_km, pt.chain.levels.back().time);
  pt.p_pr = std::exp(log_ppr);
  double log_rate = std::log(pt.link.p0_multiplexed) - std::log(pt.link.comm_time) + log_ppr;
  for (const auto& level : pt.chain.levels) log_rate += std::log(level.probability);
  if (!(log_rate > std::log(kUnderflowThreshold))) {
    pt.status = RateStatus::rate_underflow;
    return pt;
  }
  pt.rate = std::exp(log_rate);
  return pt;
}

struct RateCurve {
  RepeaterParams params;
  std::vector<RatePoint> points;
};

inline RateCurve sweep_distance(const RepeaterParams& p, double l_min, double l_max, int points,
                                Grid grid = Grid::log) {
  checked(p);
  detail::require(l_min > 0.0 && l_min < l_max, "need 0 < l_min < l_max");
  detail::require(points >= 2, "need at least two sweep points");
  RateCurve curve{p, {}};
  curve.points.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / (points - 1);
    double l = grid == Grid::log ? l_min * std::pow(l_max / l_min, f) : l_min + f * (l_max - l_min);
    if (i == points - 1) l = l_max;
    curve.points.push_back(repeater_rate(p, l));
  }
  return curve;
}

/// Distance at which the curve first drops through `target_rate`, by
/// log-linear interpolation between the bracketing points. Empty when the
/// target is not bracketed.
inline std::optional<double> crossing_distance(const RateCurve& curve, double target_rate) {
  detail::require(target_rate > 0.0, "target rate must be positive");
  const auto& pts = curve.points;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double r1 = pts[i].rate;
    const double r2 = pts[i + 1].rate;
    if (r1 == target_rate) return pts[i].distance_km;
    if (!(r1 > target_rate && r2 <= target_rate)) continue;
    const double l1 = pts[i].distance_km;
    const double l2 = pts[i + 1].distance_km;
    if (r2 == target_rate) return l2;
    if (r2 <= 0.0) return l1 + (l2 - l1) * (r1 - target_rate) / r1;  // no log below zero
    const double f = (std::log(r1) - std::log(target_rate)) / (std::log(r1) - std::log(r2));
    return l1 + f * (l2 - l1);
  }
  if (!pts.empty() && pts.back().rate == target_rate) return pts.back().distance_km;
  return std::nullopt;
}

}  // namespace dlcz
