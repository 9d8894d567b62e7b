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

// Independent reference implementations used only by the tests: a
// multiprecision evaluation of the closed forms and a brute-force 4x4
// density-matrix projection. None of this calls into the library.

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_dec_float.hpp>

namespace oracle {

using Real = boost::multiprecision::cpp_dec_float_50;

inline Real retrieval(const Real& t, const Real& r0, const Real& tau0) {
  return r0 * (exp(-(t / tau0) * (t / tau0)) + exp(-t / tau0)) / 2;
}

struct RepeaterInputs {
  Real chi{"0.02"};
  Real r0{"0.77"};
  Real eta_td{"0.9"};
  Real eta_fc{"0.33"};
  Real l_att{22};
  Real tau0{16};
  Real fiber_speed{"2e8"};
  int n = 4;
  long modes = 1000;
  bool two_pow_n = false;
  int pr_mode = 1;  // 0 literal, 1 elapsed, 2 flight
};

inline Real elementary_p0(const RepeaterInputs& in, const Real& l0) {
  return in.chi * in.chi * exp(-l0 / in.l_att) * in.eta_fc * in.eta_fc * in.eta_td * in.eta_td / 2;
}

inline Real multiplexed(const Real& p0, long n) {
  Real q = 1;
  for (long i = 0; i < n; ++i) q *= (1 - p0);
  return 1 - q;
}

struct RepeaterTrace {
  Real p0, p0n, tcc, ppr, rate;
  std::vector<Real> p, t;  // t[0] = t0
};

inline RepeaterTrace repeater(const RepeaterInputs& in, const Real& distance_km) {
  RepeaterTrace tr;
  const Real l0 = in.two_pow_n ? distance_km / pow(Real(2), in.n) : distance_km / in.n;
  tr.tcc = l0 * 1000 / in.fiber_speed;
  tr.p0 = elementary_p0(in, l0);
  tr.p0n = multiplexed(tr.p0, in.modes);
  Real t = tr.tcc / tr.p0n;
  tr.t.push_back(t);
  Real prod = 1;
  for (int j = 1; j <= in.n; ++j) {
    const Real decay = in.r0 * exp(-t / in.tau0);
    const Real pj = decay * decay * in.eta_td * in.eta_td / 2;
    tr.p.push_back(pj);
    prod *= pj;
    t = t / pj;
    tr.t.push_back(t);
  }
  Real x;
  if (in.pr_mode == 0) x = distance_km / in.tau0;
  else if (in.pr_mode == 1) x = t / in.tau0;
  else x = distance_km * 1000 / in.fiber_speed / in.tau0;
  const Real d = in.r0 * exp(-x);
  tr.ppr = d * d / 2;
  tr.rate = tr.p0n * prod * tr.ppr / tr.tcc;
  return tr;
}

// ---------------------------------------------------------------------------
// Two-qubit polarization states, basis |HH>, |HV>, |VH>, |VV>.

using Matrix4c = Eigen::Matrix<std::complex<double>, 4, 4>;
using Vector2c = Eigen::Matrix<std::complex<double>, 2, 1>;
using Vector4c = Eigen::Matrix<std::complex<double>, 4, 1>;

inline Matrix4c werner_density(double p, double phase) {
  Vector4c phi = Vector4c::Zero();
  phi(0) = 1.0 / std::sqrt(2.0);
  phi(3) = std::polar(1.0 / std::sqrt(2.0), phase);
  return p * phi * phi.adjoint() + (1.0 - p) * Matrix4c::Identity() / 4.0;
}

// Linear polarizer transmitting at `deg`; `orthogonal` selects the reflected port.
inline Vector2c analyzer(double deg, bool orthogonal) {
  const double a = deg * M_PI / 180.0 + (orthogonal ? M_PI / 2.0 : 0.0);
  Vector2c v;
  v << std::cos(a), std::sin(a);
  return v;
}

inline double joint_probability(const Matrix4c& rho, double theta_s, bool s_orth,
                                double theta_as, bool as_orth) {
  const Vector2c a = analyzer(theta_s, s_orth);
  const Vector2c b = analyzer(theta_as, as_orth);
  Vector4c v;
  v << a(0) * b(0), a(0) * b(1), a(1) * b(0), a(1) * b(1);
  const Matrix4c proj = v * v.adjoint();
  return (proj * rho).trace().real();
}

}  // namespace oracle
