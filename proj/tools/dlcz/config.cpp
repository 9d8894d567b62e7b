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

#include "config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <system_error>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "dlcz/errors.hpp"

namespace dlcz::cli {
namespace {

namespace pt = boost::property_tree;
using Setter = std::function<void(RunConfig&, const std::string&)>;

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ValidationError("config key '" + key + "': not a number: '" + s + "'");
  return v;
}

std::int64_t to_int(const std::string& key, const std::string& s) {
  std::int64_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ValidationError("config key '" + key + "': not an integer: '" + s + "'");
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ValidationError("config key '" + key + "': not an unsigned integer: '" + s + "'");
  return v;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open calibration file " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("calibration file " + path.string() + ": " + e.what());
  }
}

double json_number(const nlohmann::json& j, const char* key, const std::filesystem::path& path) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ValidationError("calibration file " + path.string() + " lacks numeric '" + key + "'");
  return j.at(key).get<double>();
}

void apply_bell_calibration(RunConfig& cfg, const std::filesystem::path& path) {
  const auto j = read_json(path);
  if (j.value("kind", "") != "bell")
    throw ValidationError(path.string() + " is not a Bell calibration file");
  cfg.source.werner_p0 = json_number(j, "werner_p0", path);
  cfg.source.vis_tau_gauss = json_number(j, "vis_tau_gauss_s", path);
  cfg.source.vis_tau_exp = json_number(j, "vis_tau_exp_s", path);
  cfg.werner_set = true;
}

void apply_decay_calibration(RunConfig& cfg, const std::filesystem::path& path) {
  const auto j = read_json(path);
  if (j.value("kind", "") != "decay")
    throw ValidationError(path.string() + " is not a decay calibration file");
  cfg.decay.r0 = json_number(j, "r0", path);
  cfg.decay.tau0 = json_number(j, "tau0_s", path);
}

void add_chain_keys(std::map<std::string, std::map<std::string, Setter>>& table,
                    const std::string& section, DetectionChain RunConfig::*chain) {
  auto& s = table[section];
  const auto field = [&](const char* key, double DetectionChain::*member) {
    s[key] = [chain, member, key = std::string(key)](RunConfig& c, const std::string& v) {
      (c.*chain).*member = to_double(key, v);
    };
  };
  field("t_ocm", &DetectionChain::t_ocm);
  field("cavity_loss", &DetectionChain::cavity_loss);
  field("eta_smf", &DetectionChain::eta_smf);
  field("eta_filter", &DetectionChain::eta_filter);
  field("eta_mmf", &DetectionChain::eta_mmf);
  field("eta_det", &DetectionChain::eta_det);
  field("eta_fc", &DetectionChain::eta_fc);
}

std::map<std::string, std::map<std::string, Setter>> key_table(
    const std::filesystem::path& base_dir) {
  std::map<std::string, std::map<std::string, Setter>> t;
  auto& src = t["source"];
  src["chi"] = [](RunConfig& c, const std::string& v) {
    c.source.chi = to_double("chi", v);
    c.chi_set = true;
  };
  src["p_noise"] = [](RunConfig& c, const std::string& v) { c.source.p_noise = to_double("p_noise", v); };
  src["werner_p0"] = [](RunConfig& c, const std::string& v) {
    c.source.werner_p0 = to_double("werner_p0", v);
    c.werner_set = true;
  };
  src["vis_tau_gauss_ms"] = [](RunConfig& c, const std::string& v) {
    c.source.vis_tau_gauss = to_double("vis_tau_gauss_ms", v) * 1e-3;
    c.werner_set = true;
  };
  src["vis_tau_exp_ms"] = [](RunConfig& c, const std::string& v) {
    c.source.vis_tau_exp = to_double("vis_tau_exp_ms", v) * 1e-3;
    c.werner_set = true;
  };
  src["phase_write_rad"] = [](RunConfig& c, const std::string& v) { c.source.phase_write = to_double("phase_write_rad", v); };
  src["phase_read_rad"] = [](RunConfig& c, const std::string& v) { c.source.phase_read = to_double("phase_read_rad", v); };
  src["calibration"] = [base_dir](RunConfig& c, const std::string& v) { apply_bell_calibration(c, base_dir / v); };

  auto& dec = t["decay"];
  dec["r0"] = [](RunConfig& c, const std::string& v) { c.decay.r0 = to_double("r0", v); };
  dec["tau0_ms"] = [](RunConfig& c, const std::string& v) { c.decay.tau0 = to_double("tau0_ms", v) * 1e-3; };
  dec["calibration"] = [base_dir](RunConfig& c, const std::string& v) { apply_decay_calibration(c, base_dir / v); };

  add_chain_keys(t, "detection.write", &RunConfig::write_chain);
  add_chain_keys(t, "detection.read", &RunConfig::read_chain);

  auto& seq = t["sequence"];
  const auto time_key = [&seq](const char* key, double SequenceConfig::*member, double unit) {
    seq[key] = [member, unit, key = std::string(key)](RunConfig& c, const std::string& v) {
      c.sequence.*member = to_double(key, v) * unit;
    };
  };
  time_key("prep_ms", &SequenceConfig::prep_duration, 1e-3);
  time_key("run_ms", &SequenceConfig::run_duration, 1e-3);
  time_key("write_pulse_ns", &SequenceConfig::write_pulse, 1e-9);
  time_key("read_pulse_ns", &SequenceConfig::read_pulse, 1e-9);
  time_key("clean_pulse_ns", &SequenceConfig::clean_pulse, 1e-9);
  time_key("post_read_gap_ns", &SequenceConfig::post_read_gap, 1e-9);
  time_key("trial_period_ns", &SequenceConfig::trial_period, 1e-9);
  time_key("storage_us", &SequenceConfig::storage_time, 1e-6);
  seq["gate_ns"] = [](RunConfig& c, const std::string& v) { c.sequence.gate_width = to_double("gate_ns", v) * 1e-9; };

  auto& rep = t["repeater"];
  rep["nest_level"] = [](RunConfig& c, const std::string& v) {
    const auto n = to_int("nest_level", v);
    if (n < 1 || n > 64) throw ValidationError("nest_level must lie in [1, 64]");
    c.repeater.nest_level = static_cast<int>(n);
  };
  rep["mode_count"] = [](RunConfig& c, const std::string& v) { c.repeater.mode_count = to_int("mode_count", v); };
  rep["memory_lifetime_s"] = [](RunConfig& c, const std::string& v) { c.repeater.memory_lifetime = to_double("memory_lifetime_s", v); };
  rep["eta_td"] = [](RunConfig& c, const std::string& v) { c.repeater.eta_td = to_double("eta_td", v); };
  rep["eta_fc"] = [](RunConfig& c, const std::string& v) { c.repeater.eta_fc = to_double("eta_fc", v); };
  rep["chi"] = [](RunConfig& c, const std::string& v) { c.repeater.chi = to_double("chi", v); };
  rep["l_att_km"] = [](RunConfig& c, const std::string& v) { c.repeater.attenuation_length = to_double("l_att_km", v); };
  rep["r0"] = [](RunConfig& c, const std::string& v) { c.repeater.r0 = to_double("r0", v); };
  rep["fiber_speed_m_per_s"] = [](RunConfig& c, const std::string& v) { c.repeater.fiber_speed = to_double("fiber_speed_m_per_s", v); };
  rep["link_convention"] = [](RunConfig& c, const std::string& v) { c.repeater.link_convention = parse_link_convention(v); };
  rep["pr_exponent"] = [](RunConfig& c, const std::string& v) { c.repeater.pr_exponent = parse_pr_exponent(v); };

  auto& out = t["output"];
  out["seed"] = [](RunConfig& c, const std::string& v) { c.seed = to_uint("seed", v); };
  out["format"] = [](RunConfig& c, const std::string& v) {
    if (v != "csv" && v != "json") throw ValidationError("output format must be csv or json");
    c.format = v;
  };
  out["out"] = [base_dir](RunConfig& c, const std::string& v) { c.out = (base_dir / v).string(); };
  out["workers"] = [](RunConfig& c, const std::string& v) {
    const auto w = to_uint("workers", v);
    if (w < 1 || w > 1024) throw ValidationError("workers must lie in [1, 1024]");
    c.workers = static_cast<unsigned>(w);
  };
  return t;
}

}  // namespace

void validate(const RunConfig& cfg) {
  // chi = 0 is a legal "source off" setting for the simulator.
  SourceParams src = cfg.source;
  if (src.chi == 0.0) src.chi = 0.5;
  checked(src);
  checked(cfg.decay);
  checked(cfg.write_chain);
  checked(cfg.read_chain);
  checked(cfg.sequence);
  checked(cfg.repeater);
}

RunConfig parse_config(std::istream& is, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }

  const auto table = key_table(base_dir);
  RunConfig cfg;
  // Calibration files are applied first so explicit keys override them.
  const auto apply_section = [&](const std::string& name, const pt::ptree& section,
                                 bool calibration_pass) {
    const auto& keys = table.at(name);
    for (const auto& [key, node] : section) {
      const bool is_cal = key == "calibration";
      if (is_cal != calibration_pass) continue;
      auto it = keys.find(key);
      if (it == keys.end()) throw ValidationError("config: unknown key [" + name + "] " + key);
      it->second(cfg, node.get_value<std::string>());
    }
  };

  for (const auto& [name, section] : tree) {
    if (section.empty() && !section.data().empty())
      throw ValidationError("config: key '" + name + "' outside any section");
    if (!table.contains(name)) throw ValidationError("config: unknown section [" + name + "]");
    std::set<std::string> keys;
    for (const auto& kv : section)
      if (!keys.insert(kv.first).second)
        throw ValidationError("config: duplicate key [" + name + "] " + kv.first);
  }
  for (bool cal_pass : {true, false})
    for (const auto& [name, section] : tree) apply_section(name, section, cal_pass);

  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  return parse_config(in, path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace dlcz::cli
