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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. argv[1] is the path of the dlcz tool.

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dlcz/dlcz.hpp"
#include "mc_checks.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace dlcz;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(double x, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << x;
  return os.str();
}

// ---------------------------------------------------------------------------

Outcome decay_law() {
  Outcome o;
  const DecayModel dm{0.77, 1e-3};
  const double r1 = retrieval_efficiency(0.23e-3, dm);
  const double r2 = retrieval_efficiency(0.54e-3, dm);
  const double o1 = oracle::retrieval(oracle::Real("0.00023"), oracle::Real("0.77"), oracle::Real("0.001")).convert_to<double>();
  const double o2 = oracle::retrieval(oracle::Real("0.00054"), oracle::Real("0.77"), oracle::Real("0.001")).convert_to<double>();
  o.require(std::abs(r1 - 0.667) <= 0.005, "R(0.23 ms) = " + fmt(r1));
  o.require(std::abs(r2 - 0.512) <= 0.005, "R(0.54 ms) = " + fmt(r2));
  o.require(std::abs(r1 - o1) <= 1e-12 && std::abs(r2 - o2) <= 1e-12, "oracle mismatch");
  if (o.pass) o.detail = "R(0.23 ms) = " + fmt(r1) + ", R(0.54 ms) = " + fmt(r2);
  return o;
}

Outcome detection_budgets() {
  Outcome o;
  const double exp_eta = total_detection_efficiency(DetectionChain::experimental());
  const double imp_eta = total_detection_efficiency(DetectionChain::improved());
  o.require(std::abs(exp_eta - 0.150) <= 0.003, "experimental eta_TD = " + fmt(exp_eta));
  o.require(std::abs(imp_eta - 0.90) <= 0.01, "improved eta_TD = " + fmt(imp_eta));
  if (o.pass) o.detail = "eta_TD = " + fmt(exp_eta) + " / " + fmt(imp_eta);
  return o;
}

Outcome chsh_analytics() {
  Outcome o;
  SourceParams ideal;
  ideal.werner_p0 = 1.0;
  ideal.vis_tau_gauss = ideal.vis_tau_exp = 1e9;
  ideal.p_noise = 0.0;
  const DecayModel unit{1.0, 1.0};
  const double s_ideal = expected_bell_parameter(ideal, unit, 0.0, 1.0);
  SourceParams werner = ideal;
  werner.werner_p0 = 0.884;
  const double s_werner = expected_bell_parameter(werner, unit, 0.0, 1.0);
  const double f = fidelity_from_bell(1.15);
  o.require(std::abs(s_ideal - 2.0 * std::sqrt(2.0)) <= 1e-12, "ideal S = " + fmt(s_ideal, 17));
  o.require(std::abs(s_werner - 2.5) <= 0.001, "Werner S = " + fmt(s_werner));
  o.require(std::abs(f - 0.555) <= 0.005, "F(1.15) = " + fmt(f));
  if (o.pass)
    o.detail = "S_ideal - 2sqrt2 = " + fmt(s_ideal - 2.0 * std::sqrt(2.0), 3) + ", S(p=0.884) = " +
               fmt(s_werner) + ", F(1.15) = " + fmt(f);
  return o;
}

Outcome bell_calibration() {
  Outcome o;
  const double read_eta = total_detection_efficiency(DetectionChain::experimental());
  const double write_eta = read_eta;
  const DecayModel dm{reference::kZeroDelayRetrieval, reference::kRetrievalLifetime};
  const auto points = reference::bell_points();
  BellFit fit;
  try {
    fit = fit_bell_model(points, dm, read_eta, reference::kNoisePerReadPulse);
  } catch (const NumericalFailure& e) {
    o.require(false, std::string("fit failed: ") + e.what());
    return o;
  }
  for (std::size_t i = 0; i < points.size(); ++i)
    o.require(std::abs(fit.residuals[i]) <= 0.03, "residual " + fmt(fit.residuals[i]));

  SourceParams sp;
  sp.chi = reference::kBellExcitation;
  sp.p_noise = reference::kNoisePerReadPulse;
  sp = fit.apply_to(sp);
  std::string zs;
  for (std::size_t i = 0; i < points.size(); ++i) {
    ExperimentSpec spec;
    spec.source = sp;
    spec.decay = dm;
    spec.write_eta = write_eta;
    spec.read_eta = read_eta;
    spec.seed = {20260416 + i};
    SequenceConfig cfg = spec.sequence;
    cfg.storage_time = points[i].t;
    spec.n_cycles = cycles_for_attempts(cfg, sp.chi * write_eta, 1e7);
    const auto row = run_storage_point(spec, points[i].t, {false, true});
    std::uint64_t attempts = ~0ull;
    for (const auto& c : *row.bell_counts) attempts = std::min<std::uint64_t>(attempts, c.n_trials);
    o.require(attempts >= 9'900'000, "only " + std::to_string(attempts) + " trials");
    const double analytic = bell_model(fit, dm, read_eta, sp.p_noise, points[i].t);
    const double z = std::abs(row.bell->value - analytic) / row.bell->sigma;
    zs += (zs.empty() ? "" : ", ") + fmt(z, 3);
    o.require(z <= 3.0, "MC S = " + fmt(row.bell->value) + " vs " + fmt(analytic) + " (" +
                            fmt(z, 3) + " sigma)");
  }
  if (o.pass)
    o.detail = "residuals " + fmt(fit.residuals[0], 3) + ", " + fmt(fit.residuals[1], 3) + ", " +
               fmt(fit.residuals[2], 3) + "; MC |z| = " + zs;
  return o;
}

Outcome sequencer() {
  Outcome o;
  const SequenceConfig cfg;
  SourceParams sp;
  sp.chi = reference::kBellExcitation;
  const auto r = run_trials(cfg, sp, {}, 0.15, 0.15, {}, cfg.cycles_in(1.0), {1});
  o.require(cfg.cycles_in(1.0) == 20, "cycles " + std::to_string(cfg.cycles_in(1.0)));
  o.require(r.counts.n_trials == 80000, "trials " + std::to_string(r.counts.n_trials));
  if (o.pass) o.detail = "20 cycles x 4000 = " + std::to_string(r.counts.n_trials) + " trials";
  return o;
}

Outcome repeater_model() {
  Outcome o;
  // unit values against the multiprecision oracle
  RepeaterParams p;
  const auto link = elementary_probability(p, 250.0);
  oracle::RepeaterInputs in;
  const auto want_p0 = oracle::elementary_p0(in, oracle::Real("62.5"));
  const auto want_pn = oracle::multiplexed(want_p0, 1000);
  const auto rel = [](double got, const oracle::Real& want) {
    return std::abs(got - want.convert_to<double>()) / want.convert_to<double>();
  };
  o.require(rel(link.p0, want_p0) <= 1e-6, "P0 = " + fmt(link.p0));
  o.require(std::abs(link.p0 - 1.03e-6) <= 0.005e-6, "P0 far from 1.03e-6");
  o.require(rel(link.p0_multiplexed, want_pn) <= 1e-6, "P0N = " + fmt(link.p0_multiplexed));
  for (auto mode : {PrExponent::literal_L_over_tau, PrExponent::total_elapsed_time,
                    PrExponent::flight_time}) {
    for (auto lc : {LinkConvention::L_over_n, LinkConvention::L_over_2_pow_n}) {
      RepeaterParams q;
      q.pr_exponent = mode;
      q.link_convention = lc;
      auto qi = in;
      qi.pr_mode = mode == PrExponent::literal_L_over_tau ? 0 : mode == PrExponent::total_elapsed_time ? 1 : 2;
      qi.two_pow_n = lc == LinkConvention::L_over_2_pow_n;
      for (double l : {50.0, 200.0, 600.0}) {
        const auto pt = repeater_rate(q, l);
        if (pt.status != RateStatus::ok) continue;
        o.require(rel(pt.rate, oracle::repeater(qi, oracle::Real(l)).rate) <= 1e-6,
                  "rate mismatch at " + fmt(l) + " km");
      }
    }
  }

  // property suite
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int violations = 0, shortcut_checked = 0;
  for (int i = 0; i < 2000; ++i) {
    RepeaterParams q;
    q.memory_lifetime = 0.5 + 40 * u(gen);
    q.eta_td = 0.2 + 0.8 * u(gen);
    q.eta_fc = 0.1 + 0.9 * u(gen);
    q.r0 = 0.2 + 0.8 * u(gen);
    q.chi = 0.005 + 0.1 * u(gen);
    q.mode_count = 1 + static_cast<long>(3000 * u(gen));
    q.pr_exponent = static_cast<PrExponent>(i % 3);
    q.link_convention = i % 2 ? LinkConvention::L_over_n : LinkConvention::L_over_2_pow_n;
    const double l = 5.0 + 2000.0 * u(gen);
    const auto pt = repeater_rate(q, l);
    bool ok = pt.rate >= 0.0 && pt.link.p0 <= 1.0 && pt.link.p0_multiplexed <= 1.0 && pt.p_pr <= 1.0;
    double prev = pt.link.t0;
    for (const auto& level : pt.chain.levels) {
      ok = ok && level.probability > 0.0 && level.probability <= 1.0 && level.time > prev;
      prev = level.time;
    }
    const double base = pt.rate, tol = base * 1e-12, step = 1.0 + 0.2 * u(gen);
    const auto bumped = [&](const std::function<void(RepeaterParams&)>& f) {
      RepeaterParams b = q;
      f(b);
      return repeater_rate(b, l).rate;
    };
    ok = ok && bumped([&](auto& b) { b.r0 = std::min(1.0, b.r0 * step); }) >= base - tol;
    ok = ok && bumped([&](auto& b) { b.eta_td = std::min(1.0, b.eta_td * step); }) >= base - tol;
    ok = ok && bumped([&](auto& b) { b.eta_fc = std::min(1.0, b.eta_fc * step); }) >= base - tol;
    ok = ok && bumped([&](auto& b) { b.mode_count += 1 + b.mode_count / 5; }) >= base - tol;
    ok = ok && bumped([&](auto& b) { b.memory_lifetime *= step; }) >= base - tol;
    if (pt.link.reachable && pt.link.p0_shortcut < 0.02) {
      ++shortcut_checked;
      ok = ok && std::abs(pt.link.p0_shortcut - pt.link.p0_multiplexed) <= 0.01 * pt.link.p0_multiplexed;
    }
    violations += !ok;
  }
  o.require(violations == 0, std::to_string(violations) + " property violations");
  o.require(shortcut_checked > 100, "too few shortcut cases");

  for (int m = 0; m < 3; ++m) {
    RepeaterParams cpe;
    cpe.pr_exponent = static_cast<PrExponent>(m);
    RepeaterParams cie = cpe;
    cie.r0 = 0.58;
    const auto a = sweep_distance(cpe, 1.0, 3000.0, 400);
    const auto b = sweep_distance(cie, 1.0, 3000.0, 400);
    for (std::size_t i = 0; i < a.points.size(); ++i)
      if (a.points[i].rate < b.points[i].rate) {
        o.require(false, "CIE above CPE");
        break;
      }
  }

  // anchor report
  const auto report = crossing_report({}, {});
  int reproducing = 0;
  o.require(report.size() == 18, "report has " + std::to_string(report.size()) + " entries");
  for (const auto& e : report) reproducing += e.reproduces_anchors;
  if (o.pass)
    o.detail = "P0 = " + fmt(link.p0) + ", properties hold on 2000 draws; crossing report " +
               std::to_string(report.size()) + " combinations, " + std::to_string(reproducing) +
               " reproduce both anchors within 15%";
  return o;
}

Outcome statistical_core() {
  Outcome o;
  std::mt19937_64 gen(777);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int exceed = 0, total = 0;
  std::uint64_t fewest = ~0ull;
  for (int set = 0; set < 20; ++set) {
    ExperimentSpec spec;
    spec.source.chi = 0.05 + 0.25 * u(gen);
    spec.source.werner_p0 = 0.3 + 0.7 * u(gen);
    spec.source.vis_tau_gauss = 0.5e-3 + 4e-3 * u(gen);
    spec.source.vis_tau_exp = 0.5e-3 + 8e-3 * u(gen);
    spec.source.p_noise = 2e-3 * u(gen);
    spec.source.phase_write = 0.5 * u(gen);
    spec.decay = {0.4 + 0.55 * u(gen), 0.3e-3 + 2e-3 * u(gen)};
    spec.write_eta = 0.2 + 0.7 * u(gen);
    spec.read_eta = 0.05 + 0.9 * u(gen);
    spec.sequence.storage_time = 1.5e-3 * u(gen);
    spec.seed = {9000 + static_cast<std::uint64_t>(set)};
    spec.n_cycles = cycles_for_heralds(spec.sequence, spec.source.chi * spec.write_eta, 1.01e6);
    auto cmp = mccheck::compare(spec, spec.sequence.storage_time);
    while (cmp.min_heralds < 1'000'000) {
      spec.n_cycles += spec.n_cycles / 50 + 1;
      cmp = mccheck::compare(spec, spec.sequence.storage_time);
    }
    fewest = std::min(fewest, cmp.min_heralds);
    for (const auto& row : cmp.rows) {
      ++total;
      worst = std::max(worst, row.z());
      if (row.z() > 3.0) {
        ++exceed;
        o.require(false, "set " + std::to_string(set) + " " + row.name + " " + fmt(row.z(), 3) + " sigma");
      }
    }
  }

  std::uniform_real_distribution<double> angle(-180.0, 180.0), phase(0.0, kTwoPi);
  double max_dev = 0.0;
  for (int i = 0; i < 1000; ++i) {
    SourceParams sp;
    sp.werner_p0 = u(gen);
    sp.phase_write = phase(gen);
    sp.phase_read = phase(gen);
    sp.p_noise = 0.0;
    sp.vis_tau_gauss = sp.vis_tau_exp = 1e9;
    const MeasurementSettings set{angle(gen), angle(gen)};
    const auto got = coincidence_probabilities(sp, {1.0, 1.0}, 0.0, 1.0, set);
    const auto rho = oracle::werner_density(sp.werner_p0, sp.phase_write + sp.phase_read);
    const std::array<double, 4> mine{got.d1d3, got.d1d4, got.d2d3, got.d2d4};
    const std::array<std::pair<bool, bool>, 4> ports{{{false, false}, {false, true}, {true, false}, {true, true}}};
    for (std::size_t k = 0; k < 4; ++k)
      max_dev = std::max(max_dev, std::abs(mine[k] - oracle::joint_probability(
                                                         rho, set.theta_s, ports[k].first,
                                                         set.theta_as, ports[k].second)));
  }
  o.require(max_dev <= 1e-12, "density-matrix deviation " + fmt(max_dev, 3));
  if (o.pass || exceed > 0)
    o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(total) +
                " estimator comparisons, worst " + fmt(worst, 3) + " sigma, fewest heralds " +
                std::to_string(fewest) + ", " + std::to_string(exceed) + " beyond 3 sigma (" +
                fmt(total * 0.0027, 2) + " expected by chance); density-matrix max deviation " +
                fmt(max_dev, 3);
  return o;
}

// ---------------------------------------------------------------------------
// Determinism of the command-line tool.

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Runs the tool in a fresh directory and returns stdout followed by every
// file it wrote, in name order.
std::string run_tool(const std::string& tool, const std::string& args, const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cmd = "cd '" + dir.string() + "' && '" + tool + "' " + args + " > stdout.txt 2> stderr.txt";
  const int rc = std::system(cmd.c_str());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename() != "stderr.txt") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all = "rc=" + std::to_string(rc) + "\n";
  for (const auto& f : files) all += "== " + f.filename().string() + "\n" + slurp(f);
  return all;
}

Outcome determinism(const std::string& tool, const fs::path& source_dir) {
  Outcome o;
  if (tool.empty() || !fs::exists(tool)) {
    o.require(false, "tool path not given");
    return o;
  }
  const std::string cfg = (source_dir / "configs").string();
  const std::vector<std::pair<std::string, bool>> commands{
      {"efficiency --seed 11", false},
      {"efficiency --montecarlo --times-us 0,230,540 --trials 1000000 --seed 11", true},
      {"bell --seed 11", false},
      {"bell --mode montecarlo --trials 1000000 --seed 11", true},
      {"bell --mode montecarlo --trials 500000 --bootstrap 200 --seed 11 --format json", true},
      {"repeater --out rate.csv --points 200 --seed 11", false},
      {"repeater --config '" + cfg + "/repeater.ini' --r0 0.77 --format json", false},
      {"calibrate --which decay --seed 11", false},
      {"calibrate --which bell --out bell.json", false},
      {"simulate --seconds 2 --seed 11 --dump dump.csv", true},
      {"simulate --config '" + cfg + "/simulate_dark.ini' --dump-all --dump all.csv", true},
  };
  const fs::path scratch = fs::temp_directory_path() / "dlcz_acceptance";
  int checked = 0;
  for (const auto& [args, parallel] : commands) {
    const std::string a = run_tool(tool, args, scratch / "a");
    const std::string b = run_tool(tool, args, scratch / "b");
    o.require(a.rfind("rc=0\n", 0) == 0, "'" + args + "' failed");
    o.require(a == b, "'" + args + "' differs between runs");
    ++checked;
    if (parallel) {
      const std::string c = run_tool(tool, args + " --workers 4", scratch / "c");
      o.require(a == c, "'" + args + "' depends on worker count");
    }
  }
  fs::remove_all(scratch);
  if (o.pass) o.detail = std::to_string(checked) + " commands byte-identical across runs and worker counts";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string tool = argc > 1 ? fs::absolute(argv[1]).string() : "";
  const fs::path source_dir = argc > 2 ? argv[2] : DLCZ_SOURCE_DIR;

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 decay law", decay_law},
      {"2 detection budgets", detection_budgets},
      {"3 CHSH analytics", chsh_analytics},
      {"4 Bell-curve calibration", bell_calibration},
      {"5 sequencer arithmetic", sequencer},
      {"6 repeater model", repeater_model},
      {"7 statistical core", statistical_core},
      {"8 determinism", [&] { return determinism(tool, source_dir); }},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
