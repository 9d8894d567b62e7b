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

#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "dlcz/dlcz.hpp"

namespace dlcz::cli {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  unsigned workers = 0;
};

struct Resolved {
  RunConfig cfg;
  SeedSpec seed;
  std::string format;  // csv | json
  std::optional<fs::path> out;
  unsigned workers = 1;
};

/// Files produced by a command; nothing is written until all are rendered.
struct Outputs {
  std::string primary;  // to --out or stdout
  std::vector<std::pair<fs::path, std::string>> files;
};

Resolved resolve(const CommonOptions& o) {
  Resolved r;
  r.cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.config.empty()) validate(r.cfg);
  r.seed.master_seed = o.seed.value_or(r.cfg.seed.value_or(1));
  r.format = !o.format.empty() ? o.format : r.cfg.format.value_or("csv");
  if (!o.out.empty()) r.out = o.out;
  else if (r.cfg.out) r.out = *r.cfg.out;
  r.workers = o.workers > 0 ? o.workers : r.cfg.workers.value_or(1);
  return r;
}

void write_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError("cannot write " + path.string());
    f << content;
    if (!f) throw ValidationError("failed writing " + path.string());
  }
  fs::rename(tmp, path);
}

std::string csv_line(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_number(v[i]);
  }
  return s + '\n';
}

// A table rendered either as CSV or as a JSON array of row objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string render(const std::string& format) const {
    if (format == "json") {
      json arr = json::array();
      for (const auto& row : rows) {
        json obj = json::object();
        for (std::size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = row[i];
        arr.push_back(std::move(obj));
      }
      return arr.dump(2) + '\n';
    }
    std::string s;
    for (std::size_t i = 0; i < columns.size(); ++i) s += (i ? "," : "") + columns[i];
    s += '\n';
    for (const auto& row : rows) s += csv_line(row);
    return s;
  }
};

std::vector<double> time_grid_us(const std::vector<double>& explicit_us, double t_max_us,
                                 double step_us) {
  if (!explicit_us.empty()) {
    for (double t : explicit_us)
      detail::require(t >= 0.0 && std::isfinite(t), "storage times must be non-negative");
    return explicit_us;
  }
  detail::require(t_max_us >= 0.0 && step_us > 0.0, "need t-max >= 0 and t-step > 0");
  std::vector<double> ts;
  const auto n = static_cast<std::int64_t>(std::floor(t_max_us / step_us + 1e-9));
  for (std::int64_t i = 0; i <= n; ++i) ts.push_back(static_cast<double>(i) * step_us);
  return ts;
}

// Spec for one storage time with about `trials` write attempts.
ExperimentSpec at_storage(ExperimentSpec spec, double t, std::int64_t trials) {
  SequenceConfig cfg = spec.sequence;
  cfg.storage_time = t;
  spec.n_cycles = cycles_for_attempts(cfg, spec.source.chi * spec.write_eta,
                                      static_cast<double>(trials));
  return spec;
}

// Source used by the Bell-type commands: chi = 2% and the Werner decay fitted
// to the reference CHSH points unless the config supplies them.
SourceParams bell_source(const RunConfig& cfg) {
  SourceParams sp = cfg.source;
  if (!cfg.chi_set) sp.chi = reference::kBellExcitation;
  if (!cfg.werner_set) {
    const double read_eta = total_detection_efficiency(cfg.read_chain);
    sp = fit_bell_model(reference::bell_points(), cfg.decay, read_eta, sp.p_noise).apply_to(sp);
  }
  return sp;
}

// ---------------------------------------------------------------------------

struct EfficiencyOptions {
  std::vector<double> times_us;
  double t_max_us = 3000.0;
  double t_step_us = 100.0;
  bool montecarlo = false;
  std::int64_t trials = 10'000'000;
};

Outputs cmd_efficiency(const Resolved& r, const EfficiencyOptions& o) {
  const auto ts = time_grid_us(o.times_us, o.t_max_us, o.t_step_us);
  Table table{{"t_us", "R_model"}, {}};
  if (!o.montecarlo) {
    for (double t : ts) table.rows.push_back({t, retrieval_efficiency(t * 1e-6, r.cfg.decay)});
    return {table.render(r.format), {}};
  }
  detail::require(o.trials >= 1, "--trials must be at least 1");
  // Efficiency runs use chi = 1% and, unless configured, perfectly
  // correlated H/V retrieval.
  SourceParams sp = r.cfg.source;
  if (!r.cfg.chi_set) sp.chi = reference::kEfficiencyExcitation;
  if (!r.cfg.werner_set) {
    sp.werner_p0 = 1.0;
    sp.vis_tau_gauss = sp.vis_tau_exp = 1e3;
  }
  ExperimentSpec spec{r.cfg.sequence,
                      sp,
                      r.cfg.decay,
                      total_detection_efficiency(r.cfg.write_chain),
                      total_detection_efficiency(r.cfg.read_chain),
                      1,
                      r.seed,
                      {r.workers, false, false}};
  table.columns = {"t_us", "R_model", "R_mc", "R_mc_err"};
  for (double t : ts) {
    const auto row = run_storage_point(at_storage(spec, t * 1e-6, o.trials), t * 1e-6, {true, false});
    table.rows.push_back({t, retrieval_efficiency(t * 1e-6, r.cfg.decay), row.retrieval->qubit.value,
                          row.retrieval->qubit.sigma});
  }
  return {table.render(r.format), {}};
}

struct BellOptions {
  std::vector<double> times_us{0.0, 1150.0, 2600.0};
  std::string mode = "analytic";
  std::int64_t trials = 10'000'000;
  int bootstrap = 0;
  bool ideal = false;
};

Outputs cmd_bell(const Resolved& r, const BellOptions& o) {
  SourceParams sp = bell_source(r.cfg);
  if (o.ideal) {
    sp.werner_p0 = 1.0;
    sp.vis_tau_gauss = sp.vis_tau_exp = 1e3;
    sp.p_noise = 0.0;
  }
  const double read_eta = total_detection_efficiency(r.cfg.read_chain);
  Table table{{"t_us", "S", "S_err"}, {}};
  if (o.mode == "analytic") {
    for (double t : o.times_us) {
      detail::require(t >= 0.0, "storage times must be non-negative");
      table.rows.push_back({t, expected_bell_parameter(sp, r.cfg.decay, t * 1e-6, read_eta), 0.0});
    }
    return {table.render(r.format), {}};
  }
  detail::require(o.trials >= 1, "--trials must be at least 1");
  ExperimentSpec spec{r.cfg.sequence,
                      sp,
                      r.cfg.decay,
                      total_detection_efficiency(r.cfg.write_chain),
                      read_eta,
                      1,
                      r.seed,
                      {r.workers, false, false}};
  for (double t : o.times_us) {
    const auto row = run_storage_point(at_storage(spec, t * 1e-6, o.trials), t * 1e-6, {false, true});
    double err = row.bell->sigma;
    if (o.bootstrap > 0) {
      BootstrapInput in;
      in.correlation.assign(row.bell_counts->begin(), row.bell_counts->end());
      err = *bootstrap_errors(in, o.bootstrap, sweep_seed(r.seed, t * 1e-6, 99)).bell;
    }
    table.rows.push_back({t, row.bell->value, err});
  }
  return {table.render(r.format), {}};
}

struct RepeaterOptions {
  double l_min = 10.0;
  double l_max = 2000.0;
  int points = 200;
  std::string grid = "log";
  std::vector<double> r0s;
  std::string link_convention;
  std::string interpretation;
  std::optional<double> chi;
  double target_rate = 1e-4;
  std::string summary;
};

json curve_json(const RateCurve& c) {
  json pts = json::array();
  for (const auto& p : c.points) {
    json levels = json::array();
    for (const auto& l : p.chain.levels) levels.push_back({{"P", l.probability}, {"t_s", l.time}});
    pts.push_back({{"L_km", p.distance_km},
                   {"rate_per_s", p.rate},
                   {"status", std::string(to_string(p.status))},
                   {"P0", p.link.p0},
                   {"P0N", p.link.p0_multiplexed},
                   {"t0_s", p.link.t0},
                   {"levels", levels},
                   {"Ppr", p.p_pr}});
  }
  return pts;
}

std::string curve_csv(const RateCurve& c) {
  const int n = c.params.nest_level;
  std::string s = "L_km,rate_per_s,P0,P0N";
  for (int j = 1; j <= n; ++j) s += ",P" + std::to_string(j);
  for (int j = 0; j <= n; ++j) s += ",t" + std::to_string(j) + "_s";
  s += ",Ppr\n";
  for (const auto& p : c.points) {
    std::vector<double> row{p.distance_km, p.rate, p.link.p0, p.link.p0_multiplexed};
    for (int j = 0; j < n; ++j)
      row.push_back(j < static_cast<int>(p.chain.levels.size()) ? p.chain.levels[j].probability : 0.0);
    row.push_back(p.link.reachable ? p.link.t0 : INFINITY);
    for (int j = 0; j < n; ++j)
      row.push_back(j < static_cast<int>(p.chain.levels.size()) ? p.chain.levels[j].time : INFINITY);
    row.push_back(p.p_pr);
    s += csv_line(row);
  }
  return s;
}

json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

fs::path suffixed(const fs::path& base, const std::string& suffix, const std::string& ext) {
  fs::path p = base;
  p.replace_filename(base.stem().string() + suffix + ext);
  return p;
}

Outputs cmd_repeater(const Resolved& r, const RepeaterOptions& o, std::ostream& err) {
  RepeaterParams p = r.cfg.repeater;
  if (!o.link_convention.empty()) p.link_convention = parse_link_convention(o.link_convention);
  if (!o.interpretation.empty()) p.pr_exponent = parse_pr_exponent(o.interpretation);
  if (o.chi) p.chi = *o.chi;
  detail::require(o.grid == "log" || o.grid == "linear", "--grid must be log or linear");
  detail::require(o.target_rate > 0.0, "--target-rate must be positive");
  const std::vector<double> r0s =
      o.r0s.empty() ? std::vector<double>{reference::kZeroDelayRetrieval,
                                          reference::kCieZeroDelayRetrieval}
                    : o.r0s;
  checked(p);
  for (double r0 : r0s) detail::require(detail::is_probability(r0), "--r0 must lie in [0, 1]");
  if (r.format == "csv" && r0s.size() > 1 && !r.out)
    throw ValidationError("several --r0 curves in CSV form need --out (used as a file prefix)");

  std::vector<RateCurve> curves;
  for (double r0 : r0s) {
    RepeaterParams q = p;
    q.r0 = r0;
    curves.push_back(sweep_distance(q, o.l_min, o.l_max, o.points,
                                    o.grid == "log" ? Grid::log : Grid::linear));
  }

  json summary;
  summary["target_rate"] = o.target_rate;
  summary["link_convention"] = std::string(to_string(p.link_convention));
  summary["pr_exponent"] = std::string(to_string(p.pr_exponent));
  summary["non_physical_units"] = !is_physical(p.pr_exponent);
  summary["warnings"] = json::array();
  if (!is_physical(p.pr_exponent)) {
    const std::string w =
        "pr_exponent literal_L_over_tau evaluates exp(-L/tau0) with L in km and tau0 in s; "
        "the result has no physical units";
    summary["warnings"].push_back(w);
    err << "warning: " << w << '\n';
  }
  summary["parameters"] = {{"nest_level", p.nest_level},
                           {"mode_count", p.mode_count},
                           {"memory_lifetime_s", p.memory_lifetime},
                           {"eta_td", p.eta_td},
                           {"eta_fc", p.eta_fc},
                           {"chi", p.chi},
                           {"l_att_km", p.attenuation_length},
                           {"fiber_speed_m_per_s", p.fiber_speed}};

  Outputs outputs;
  json curve_entries = json::array();
  for (const auto& c : curves) {
    json entry = {{"r0", c.params.r0},
                  {"crossing_km", optional_json(crossing_distance(c, o.target_rate))}};
    if (r.format == "csv") {
      if (curves.size() == 1) {
        outputs.primary = curve_csv(c);
      } else {
        const fs::path file = suffixed(*r.out, "_r0-" + format_number(c.params.r0), ".csv");
        entry["file"] = file.filename().string();
        outputs.files.emplace_back(file, curve_csv(c));
      }
    } else {
      entry["points"] = curve_json(c);
    }
    curve_entries.push_back(std::move(entry));
  }
  summary["curves"] = std::move(curve_entries);

  CrossingAnchors anchors;
  anchors.target_rate = o.target_rate;
  json report = json::array();
  for (const auto& e : crossing_report(p, anchors)) {
    std::optional<double> ratio;
    if (e.cpe_km && e.cie_km && *e.cie_km > 0.0) ratio = *e.cpe_km / *e.cie_km;
    report.push_back({{"link_convention", std::string(to_string(e.link))},
                      {"pr_exponent", std::string(to_string(e.pr))},
                      {"non_physical_units", !is_physical(e.pr)},
                      {"chi_label", e.chi_label},
                      {"chi", optional_json(e.chi)},
                      {"cpe_crossing_km", optional_json(e.cpe_km)},
                      {"cie_crossing_km", optional_json(e.cie_km)},
                      {"cpe_over_cie", optional_json(ratio)},
                      {"reproduces_anchors", e.reproduces_anchors}});
  }
  summary["crossing_report"] = std::move(report);
  summary["anchors"] = {{"cpe_r0", anchors.cpe_r0},     {"cie_r0", anchors.cie_r0},
                        {"cpe_km", anchors.cpe_km},     {"cie_km", anchors.cie_km},
                        {"tolerance", anchors.tolerance}};

  const std::string summary_text = summary.dump(2) + '\n';
  if (r.format == "json") {
    outputs.primary = summary_text;
  } else if (!o.summary.empty()) {
    outputs.files.emplace_back(o.summary, summary_text);
  } else if (r.out) {
    outputs.files.emplace_back(suffixed(*r.out, "_summary", ".json"), summary_text);
  }
  // several curves are all side files; the primary slot stays empty
  return outputs;
}

struct CalibrateOptions {
  std::string data;
  std::string which;
};

Outputs cmd_calibrate(const Resolved& r, const CalibrateOptions& o) {
  std::vector<DataPoint> points;
  if (o.data.empty()) {
    points = o.which == "decay" ? reference::efficiency_points() : reference::bell_points();
  } else {
    std::ifstream in(o.data);
    if (!in) throw ValidationError("cannot open data file " + o.data);
    points = read_data_points(in);
  }
  json j;
  if (o.which == "decay") {
    const auto fit = fit_decay(points);
    j = {{"kind", "decay"},       {"r0", fit.model.r0},        {"tau0_s", fit.model.tau0},
         {"r0_sigma", fit.r0_sigma}, {"tau0_sigma_s", fit.tau0_sigma}, {"residuals", fit.residuals},
         {"chi2", fit.chi2}};
  } else {
    const double read_eta = total_detection_efficiency(r.cfg.read_chain);
    const auto fit = fit_bell_model(points, r.cfg.decay, read_eta, r.cfg.source.p_noise);
    j = {{"kind", "bell"},
         {"werner_p0", fit.werner_p0},
         {"vis_tau_gauss_s", fit.vis_tau_gauss},
         {"vis_tau_exp_s", fit.vis_tau_exp},
         {"decay_constrained", fit.decay_constrained},
         {"residuals", fit.residuals},
         {"chi2", fit.chi2},
         {"inputs",
          {{"r0", r.cfg.decay.r0},
           {"tau0_s", r.cfg.decay.tau0},
           {"readout_eta", read_eta},
           {"p_noise", r.cfg.source.p_noise}}}};
  }
  return {j.dump(2) + '\n', {}};
}

struct SimulateOptions {
  double seconds = 1.0;
  std::optional<double> storage_us;
  double theta_s = 0.0;
  double theta_as = 0.0;
  std::string dump;
  bool dump_all = false;
};

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Outputs cmd_simulate(const Resolved& r, const SimulateOptions& o) {
  detail::require(o.seconds > 0.0 && std::isfinite(o.seconds), "--seconds must be positive");
  SequenceConfig seq = r.cfg.sequence;
  if (o.storage_us) seq.storage_time = *o.storage_us * 1e-6;
  checked(seq);
  const std::int64_t cycles = seq.cycles_in(o.seconds);
  detail::require(cycles >= 1, "--seconds is shorter than one experimental cycle");

  SourceParams sp = r.cfg.source;
  if (sp.chi > 0.0) sp = bell_source(r.cfg);
  const bool dumping = !o.dump.empty();
  const auto result =
      run_trials(seq, sp, r.cfg.decay, total_detection_efficiency(r.cfg.write_chain),
                 total_detection_efficiency(r.cfg.read_chain), {o.theta_s, o.theta_as}, cycles,
                 r.seed, {r.workers, dumping, o.dump_all});

  json j = {{"seconds", o.seconds},
            {"cycles", cycles},
            {"slots", result.slots},
            {"trials", result.counts.n_trials},
            {"skipped_slots", result.skipped_slots},
            {"repetition_rate_per_s", static_cast<double>(result.counts.n_trials) / o.seconds},
            {"heralds", result.heralds()},
            {"s1", result.counts.s1},
            {"s2", result.counts.s2},
            {"c13", result.counts.c13},
            {"c14", result.counts.c14},
            {"c23", result.counts.c23},
            {"c24", result.counts.c24},
            {"background_coincidences", result.background_coincidences},
            {"storage_time_s", seq.storage_time},
            {"theta_s_deg", o.theta_s},
            {"theta_as_deg", o.theta_as},
            {"chi", sp.chi},
            {"seed", r.seed.master_seed}};
  Outputs outputs;
  if (dumping) {
    std::ostringstream os;
    write_click_records(os, result.records);
    const std::string dump = os.str();
    j["dump_records"] = result.records.size();
    j["dump_fnv1a64"] = fnv1a64(dump);
    outputs.files.emplace_back(o.dump, dump);
  }
  outputs.primary = j.dump(2) + '\n';
  return outputs;
}

void add_common(CLI::App* sub, CommonOptions& c) {
  sub->add_option("--config", c.config, "INI run configuration")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "master seed (u64)");
  sub->add_option("--out", c.out, "output path (default: stdout)");
  sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--workers", c.workers, "simulation worker threads")->check(CLI::Range(1, 1024));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"dlcz: cavity-enhanced DLCZ source and repeater-rate toolkit"};
  app.require_subcommand(1);
  CommonOptions common;

  EfficiencyOptions eff;
  auto* eff_cmd = app.add_subcommand("efficiency", "retrieval efficiency versus storage time");
  add_common(eff_cmd, common);
  eff_cmd->add_option("--times-us", eff.times_us, "explicit storage times (us)")->delimiter(',');
  eff_cmd->add_option("--t-max-us", eff.t_max_us, "grid end (us)");
  eff_cmd->add_option("--t-step-us", eff.t_step_us, "grid step (us)");
  eff_cmd->add_flag("--montecarlo", eff.montecarlo, "add simulated estimates");
  eff_cmd->add_option("--trials", eff.trials, "write attempts per storage time");

  BellOptions bell;
  auto* bell_cmd = app.add_subcommand("bell", "CHSH parameter versus storage time");
  add_common(bell_cmd, common);
  bell_cmd->add_option("--times-us", bell.times_us, "storage times (us)")->delimiter(',');
  bell_cmd->add_option("--mode", bell.mode, "analytic or montecarlo")
      ->check(CLI::IsMember({"analytic", "montecarlo"}));
  bell_cmd->add_option("--trials", bell.trials, "write attempts per setting and storage time");
  bell_cmd->add_option("--bootstrap", bell.bootstrap, "bootstrap resamples for S_err (0: Poisson propagation)");
  bell_cmd->add_flag("--ideal", bell.ideal, "noise-free maximally entangled source");

  RepeaterOptions rep;
  auto* rep_cmd = app.add_subcommand("repeater", "multiplexed repeater rate versus distance");
  add_common(rep_cmd, common);
  rep_cmd->add_option("--l-min", rep.l_min, "shortest distance (km)");
  rep_cmd->add_option("--l-max", rep.l_max, "longest distance (km)");
  rep_cmd->add_option("--points", rep.points, "grid points");
  rep_cmd->add_option("--grid", rep.grid, "log or linear");
  rep_cmd->add_option("--r0", rep.r0s, "zero-delay retrieval efficiencies (default 0.77,0.58)")
      ->delimiter(',');
  rep_cmd->add_option("--link-convention", rep.link_convention, "L_over_n or L_over_2_pow_n");
  rep_cmd->add_option("--interpretation", rep.interpretation,
                      "literal_L_over_tau, total_elapsed_time or flight_time");
  rep_cmd->add_option("--chi", rep.chi, "excitation probability");
  rep_cmd->add_option("--target-rate", rep.target_rate, "rate for crossing distances (1/s)");
  rep_cmd->add_option("--summary", rep.summary, "JSON summary path");

  CalibrateOptions cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "fit model parameters to data points");
  add_common(cal_cmd, common);
  cal_cmd->add_option("--data", cal.data, "CSV with header t_s,value,sigma (default: reference points)");
  cal_cmd->add_option("--which", cal.which, "decay or bell")
      ->required()
      ->check(CLI::IsMember({"decay", "bell"}));

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate the trial sequence");
  add_common(sim_cmd, common);
  sim_cmd->add_option("--seconds", sim.seconds, "seconds of experiment");
  sim_cmd->add_option("--storage-us", sim.storage_us, "storage time (us)");
  sim_cmd->add_option("--theta-s", sim.theta_s, "Stokes analyzer angle (deg)");
  sim_cmd->add_option("--theta-as", sim.theta_as, "anti-Stokes analyzer angle (deg)");
  sim_cmd->add_option("--dump", sim.dump, "click-record dump path");
  sim_cmd->add_flag("--dump-all", sim.dump_all, "also dump trials without a herald");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (eff_cmd->parsed() && eff.montecarlo && eff.trials < 1)
      throw ValidationError("--trials must be at least 1");
    const Resolved r = resolve(common);
    Outputs outputs;
    if (eff_cmd->parsed()) outputs = cmd_efficiency(r, eff);
    else if (bell_cmd->parsed()) outputs = cmd_bell(r, bell);
    else if (rep_cmd->parsed()) outputs = cmd_repeater(r, rep, err);
    else if (cal_cmd->parsed()) outputs = cmd_calibrate(r, cal);
    else outputs = cmd_simulate(r, sim);

    for (const auto& [path, content] : outputs.files) write_atomically(path, content);
    if (!outputs.primary.empty()) {
      if (r.out) write_atomically(*r.out, outputs.primary);
      else out << outputs.primary;
    }
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    if (!e.residuals().empty()) {
      err << "residuals:";
      for (double x : e.residuals()) err << ' ' << format_number(x);
      err << '\n';
    }
    return kExitNumerical;
  } catch (const InsufficientStatistics& e) {
    err << "insufficient statistics: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace dlcz::cli
