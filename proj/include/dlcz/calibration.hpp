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

// Least-squares calibration of the free model parameters against reference
// data points: the retrieval decay (R0, tau0) and the Bell-decay Werner
// model (p0, tau_gauss, tau_exp).

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "dlcz/errors.hpp"
#include "dlcz/model.hpp"

namespace dlcz {

struct DataPoint {
  double t = 0.0;      // s
  double value = 0.0;
  double sigma = 1.0;  // one standard error
};

inline constexpr const char* kDataPointHeader = "t_s,value,sigma";

inline std::vector<DataPoint> read_data_points(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("empty data file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kDataPointHeader)
    throw ValidationError(std::string("data file header must be '") + kDataPointHeader + "'");
  std::vector<DataPoint> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    DataPoint p;
    std::string extra;
    if (!(fields >> p.t >> p.value >> p.sigma) || (fields >> extra))
      throw ValidationError("malformed data row at line " + std::to_string(lineno));
    out.push_back(p);
  }
  return out;
}

inline void write_data_points(std::ostream& os, const std::vector<DataPoint>& pts) {
  os << kDataPointHeader << '\n';
  os.precision(17);
  for (const auto& p : pts) os << p.t << ',' << p.value << ',' << p.sigma << '\n';
}

namespace detail {

inline void check_points(const std::vector<DataPoint>& pts) {
  for (const auto& p : pts) {
    require(std::isfinite(p.t) && p.t >= 0.0, "data-point times must be non-negative");
    require(std::isfinite(p.value), "data-point values must be finite");
    require(p.sigma > 0.0, "data-point sigma must be positive");
  }
}

inline std::size_t distinct_times(const std::vector<DataPoint>& pts) {
  std::set<double> ts;
  for (const auto& p : pts) ts.insert(p.t);
  return ts.size();
}

// Adapter from a residual callback to Eigen's functor protocol.
struct ResidualFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> residuals;
  int n_inputs = 0;
  int n_values = 0;

  int inputs() const { return n_inputs; }
  int values() const { return n_values; }
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
    residuals(x, fvec);
    return 0;
  }
};

struct LmOutcome {
  Eigen::VectorXd x;
  double cost = std::numeric_limits<double>::infinity();
  bool converged = false;
  int evaluations = 0;
};

// Runs Levenberg-Marquardt from each start and keeps the lowest cost.
inline LmOutcome minimize_from_starts(const ResidualFunctor& f,
                                      const std::vector<Eigen::VectorXd>& starts) {
  LmOutcome best;
  for (const auto& start : starts) {
    Eigen::NumericalDiff<ResidualFunctor, Eigen::Central> diff(f);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ResidualFunctor, Eigen::Central>> lm(diff);
    lm.parameters.maxfev = 4000;
    lm.parameters.xtol = 1e-15;
    lm.parameters.ftol = 1e-15;
    Eigen::VectorXd x = start;
    const auto status = lm.minimize(x);
    Eigen::VectorXd r(f.values());
    f(x, r);
    const double cost = r.squaredNorm();
    if (!std::isfinite(cost)) continue;
    const bool converged = status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
                           status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation;
    if (cost < best.cost) best = {x, cost, converged, static_cast<int>(lm.nfev)};
  }
  return best;
}

inline std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Retrieval decay

struct DecayFit {
  DecayModel model;
  double r0_sigma = 0.0;
  double tau0_sigma = 0.0;
  std::vector<double> residuals;  // model - value at each point
  double chi2 = 0.0;
};

/// Weighted least-squares fit of R(t) = R0 (exp(-t^2/tau0^2) + exp(-t/tau0))/2.
/// R0 is kept in [0, 1] through R0 = sin^2(a); tau0 is fitted in log space.
inline DecayFit fit_decay(const std::vector<DataPoint>& points) {
  detail::check_points(points);
  detail::require(points.size() >= 3 && detail::distinct_times(points) >= 3,
                  "decay fit needs at least three distinct times");

  double t_max = 0.0, v_max = 0.0;
  for (const auto& p : points) {
    t_max = std::max(t_max, p.t);
    v_max = std::max(v_max, p.value);
  }
  const auto unpack = [t_max](const Eigen::VectorXd& x) {
    const double s = std::sin(x[0]);
    return DecayModel{s * s, t_max * std::exp(x[1])};
  };
  const auto curve = [](double t, const DecayModel& m) {
    const double u = t / m.tau0;
    return m.r0 * 0.5 * (std::exp(-u * u) + std::exp(-u));
  };

  detail::ResidualFunctor f;
  f.n_inputs = 2;
  f.n_values = static_cast<int>(points.size());
  f.residuals = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const DecayModel m = unpack(x);
    for (std::size_t i = 0; i < points.size(); ++i)
      r[static_cast<Eigen::Index>(i)] = (curve(points[i].t, m) - points[i].value) / points[i].sigma;
  };

  const double a0 = std::asin(std::sqrt(std::clamp(v_max, 0.01, 0.99)));
  std::vector<Eigen::VectorXd> starts;
  for (double scale : {0.1, 0.3, 1.0, 3.0, 10.0}) starts.push_back(Eigen::Vector2d(a0, std::log(scale)));
  const auto best = detail::minimize_from_starts(f, starts);
  if (!best.converged)
    throw NumericalFailure("decay fit did not converge", detail::to_vector(best.x));

  DecayFit fit;
  fit.model = unpack(best.x);
  fit.chi2 = best.cost;
  for (const auto& p : points) fit.residuals.push_back(curve(p.t, fit.model) - p.value);

  // Parameter covariance from the analytic Jacobian in (R0, tau0).
  Eigen::MatrixXd j(points.size(), 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double t = points[i].t, tau = fit.model.tau0, r0 = fit.model.r0;
    const double g = std::exp(-(t / tau) * (t / tau)), e = std::exp(-t / tau);
    const auto row = static_cast<Eigen::Index>(i);
    j(row, 0) = 0.5 * (g + e) / points[i].sigma;
    j(row, 1) = 0.5 * r0 * (2.0 * t * t / (tau * tau * tau) * g + t / (tau * tau) * e) /
                points[i].sigma;
  }
  const Eigen::Matrix2d cov = (j.transpose() * j).inverse();
  fit.r0_sigma = std::sqrt(cov(0, 0));
  fit.tau0_sigma = std::sqrt(cov(1, 1));
  return fit;
}

// ---------------------------------------------------------------------------
// Bell decay

struct BellFit {
  double werner_p0 = 1.0;
  double vis_tau_gauss = 1.0;  // s
  double vis_tau_exp = 1.0;    // s
  bool decay_constrained = true;  // false when only t = 0 data was given
  std::vector<double> residuals;  // model - value
  double chi2 = 0.0;

  SourceParams apply_to(SourceParams sp) const {
    sp.werner_p0 = werner_p0;
    sp.vis_tau_gauss = vis_tau_gauss;
    sp.vis_tau_exp = vis_tau_exp;
    return sp;
  }
};

struct BellFitOptions {
  bool require_within_sigma = true;
  // Decay constants reported when the data cannot constrain them.
  double unconstrained_tau = 1.0;  // s
};

/// S(t) = 2 sqrt2 p(t) q_s(t) / (q_s(t) + background) evaluated through the
/// same coincidence model the simulator samples from.
inline double bell_model(const BellFit& f, const DecayModel& dm, double readout_eta,
                         double p_noise, double t) {
  SourceParams sp;
  sp.p_noise = p_noise;
  return expected_bell_parameter(f.apply_to(sp), dm, t, readout_eta);
}

/// Fits (p0, tau_gauss, tau_exp) of the Werner decay to measured S(t).
/// p0 = sin^2(a) keeps it in [0, 1]; both time constants are fitted in log
/// space from a fixed grid of starts, so the result is deterministic.
inline BellFit fit_bell_model(const std::vector<DataPoint>& points, const DecayModel& dm,
                              double readout_eta, double p_noise,
                              const BellFitOptions& opts = {}) {
  detail::check_points(points);
  checked(dm);
  detail::require(!points.empty(), "Bell fit needs data points");
  detail::require(readout_eta > 0.0 && readout_eta <= 1.0, "readout_eta must lie in (0, 1]");
  detail::require(p_noise >= 0.0 && p_noise < 1.0, "p_noise must lie in [0, 1)");

  const auto residual_check = [&](BellFit& fit) {
    fit.residuals.clear();
    fit.chi2 = 0.0;
    bool within = true;
    for (const auto& p : points) {
      const double r = bell_model(fit, dm, readout_eta, p_noise, p.t) - p.value;
      fit.residuals.push_back(r);
      fit.chi2 += (r / p.sigma) * (r / p.sigma);
      within = within && std::abs(r) <= p.sigma * (1.0 + 1e-9);
    }
    if (opts.require_within_sigma && !within)
      throw NumericalFailure("Bell fit residuals exceed the data error bars",
                             {fit.werner_p0, fit.vis_tau_gauss, fit.vis_tau_exp}, fit.residuals);
  };

  const std::size_t n_times = detail::distinct_times(points);
  if (n_times == 1 && points.front().t == 0.0) {
    // Only the zero-delay mixing is identifiable: S(0) = 2 sqrt2 p0 q/(q+bg).
    BellFit fit;
    fit.decay_constrained = false;
    fit.vis_tau_gauss = fit.vis_tau_exp = opts.unconstrained_tau;
    const double q = retrieval_efficiency(0.0, dm) * readout_eta;
    const double bg = effective_background(q, p_noise);
    double wsum = 0.0, ssum = 0.0;
    for (const auto& p : points) {
      const double w = 1.0 / (p.sigma * p.sigma);
      wsum += w;
      ssum += w * p.value;
    }
    const double p0 = (ssum / wsum) * (q + bg) / (kTsirelsonBound * q);
    if (p0 > 1.0 + 1e-9 || p0 < 0.0)
      throw NumericalFailure("zero-delay Bell value outside the Werner range", {p0});
    fit.werner_p0 = std::clamp(p0, 0.0, 1.0);
    residual_check(fit);
    return fit;
  }
  detail::require(n_times >= 3, "Bell fit needs at least three distinct times");

  double t_max = 0.0, t_min = std::numeric_limits<double>::infinity(), s_first = 0.0;
  for (const auto& p : points) {
    t_max = std::max(t_max, p.t);
    if (p.t < t_min) {
      t_min = p.t;
      s_first = p.value;
    }
  }
  const auto unpack = [t_max](const Eigen::VectorXd& x) {
    BellFit fit;
    const double s = std::sin(x[0]);
    fit.werner_p0 = s * s;
    fit.vis_tau_gauss = t_max * std::exp(x[1]);
    fit.vis_tau_exp = t_max * std::exp(x[2]);
    return fit;
  };

  detail::ResidualFunctor f;
  f.n_inputs = 3;
  f.n_values = static_cast<int>(points.size());
  f.residuals = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const BellFit fit = unpack(x);
    for (std::size_t i = 0; i < points.size(); ++i)
      r[static_cast<Eigen::Index>(i)] =
          (bell_model(fit, dm, readout_eta, p_noise, points[i].t) - points[i].value) /
          points[i].sigma;
  };

  const double p_start = std::clamp(s_first / kTsirelsonBound, 0.05, 0.95);
  const double a0 = std::asin(std::sqrt(p_start));
  std::vector<Eigen::VectorXd> starts;
  for (double g : {0.3, 1.0, 3.0, 10.0})
    for (double e : {0.3, 1.0, 3.0, 10.0})
      starts.push_back(Eigen::Vector3d(a0, std::log(g), std::log(e)));
  const auto best = detail::minimize_from_starts(f, starts);
  if (!best.converged)
    throw NumericalFailure("Bell fit did not converge", detail::to_vector(best.x));

  BellFit fit = unpack(best.x);
  residual_check(fit);
  return fit;
}

}  // namespace dlcz
