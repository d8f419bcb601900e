// SPDX-License-Identifier: Apache-2.0
//
// nfisac - secure near-field MIMO ISAC link-level simulator
// Copyright (C) 2025-2026 the nfisac contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "nfisac/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "nfisac/geometry.hpp"

namespace nfisac::scenario {

using nlohmann::json;

belief::BeliefHyperparams BeliefConfig::to_hyperparams() const {
  belief::BeliefHyperparams p;
  p.sigma0_deg = sigma0_deg;
  p.k_expand = k_expand;
  p.k_exploit = k_exploit;
  p.sigma_min_deg = sigma_min_deg;
  p.sigma_max_deg = sigma_max_deg;
  p.k_min = k_min;
  p.k_max = k_max;
  p.conf_threshold = conf_threshold;
  p.gamma_min = gamma_min;
  p.gamma_max = gamma_max;
  p.entropy_target_bits = entropy_target_frac * std::log2(static_cast<double>(num_bins));
  p.uniform_mix = uniform_mix;
  p.mass_ceiling = mass_ceiling;
  return p;
}

double ScenarioConfig::noise_power_w() const {
  const double dbm = thermal_noise_dbm_hz + 10.0 * std::log10(bandwidth_hz) + noise_figure_db;
  return dbm_to_watts(dbm);
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& scope) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key()))
      throw std::invalid_argument("config: unknown key '" + scope + it.key() + "'");
  }
}

template <typename T>
void take(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void take_pairs(const json& obj, const char* key,
                std::vector<std::pair<double, double>>& out) {
  if (!obj.contains(key)) return;
  out.clear();
  for (const auto& row : obj.at(key)) {
    if (!row.is_array() || row.size() != 2)
      throw std::invalid_argument(std::string("config: '") + key +
                                  "' entries must be [a, b] pairs");
    out.emplace_back(row[0].get<double>(), row[1].get<double>());
  }
}

void validate(const ScenarioConfig& c) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };

  if (c.fc_hz.empty()) fail("fc_hz must list at least one carrier");
  for (double f : c.fc_hz)
    if (f <= 0.0) fail("fc_hz entries must be positive");
  if (c.bandwidth_hz <= 0.0) fail("bandwidth_hz must be positive");
  if (c.bs_antennas < 1 || c.rf_chains < 1) fail("bs_antennas and rf_chains must be positive");
  if (c.bs_antennas % c.rf_chains != 0)
    fail("bs_antennas must be divisible by rf_chains (partial connectivity)");
  if (c.streams < 1) fail("streams must be positive");
  if (c.streams > c.rf_chains) fail("streams must not exceed rf_chains");
  if (c.num_hns < c.streams) fail("num_hns must be at least streams");
  if (c.tx_power_cap_w <= 0.0) fail("tx_power_cap_w must be positive");
  if (c.pa_efficiency <= 0.0 || c.pa_efficiency > 1.0)
    fail("pa_efficiency must lie in (0, 1]");
  const double frac_sum = c.power_alpha + c.power_beta + c.power_gamma;
  if (c.power_alpha < 0.0 || c.power_beta < 0.0 || c.power_gamma < 0.0 ||
      std::abs(frac_sum - 1.0) > 1e-9)
    fail("power fractions must sum to 1 (power_alpha + power_beta + power_gamma)");
  if (c.leak_cap_fraction <= 0.0 || c.leak_cap_fraction > 1.0)
    fail("leak_cap_fraction must lie in (0, 1]");
  if (c.num_slots < 1) fail("num_slots must be positive");
  if (c.num_seeds < 1) fail("num_seeds must be positive");
  if (c.eve_start_deg.size() > c.eve_ranges_m.size())
    fail("eve_start_deg lists more angles than eve_ranges_m has eavesdroppers");
  for (double r : c.eve_ranges_m)
    if (r <= 0.0) fail("eve_ranges_m entries must be positive");
  if (c.eve_drift_deg < 0.0) fail("eve_drift_deg must be nonnegative");
  if (c.num_paths < 1) fail("num_paths must be at least 1");
  if (c.csi_eps_legit_frac < 0.0 || c.csi_eps_eve_frac < 0.0)
    fail("CSI error fractions must be nonnegative");

  const auto& b = c.belief;
  if (b.num_bins < 2) fail("belief.num_bins must be at least 2");
  if (!(b.sigma_min_deg <= b.sigma0_deg && b.sigma0_deg <= b.sigma_max_deg))
    fail("belief must satisfy sigma_min_deg <= sigma0_deg <= sigma_max_deg");
  if (b.k_min > b.k_max) fail("belief.k_min must not exceed belief.k_max");
  if (b.gamma_min > b.gamma_max) fail("belief.gamma_min must not exceed belief.gamma_max");
  if (b.conf_threshold <= 0.0 || b.conf_threshold > 1.0)
    fail("belief.conf_threshold must lie in (0, 1]");
  if (b.entropy_target_frac < 0.0 || b.entropy_target_frac > 1.0)
    fail("belief.entropy_target_frac must lie in [0, 1]");
  if (b.uniform_mix < 0.0 || b.uniform_mix > 1.0)
    fail("belief.uniform_mix must lie in [0, 1]");
  if (b.mass_ceiling <= 0.0 || b.mass_ceiling > 1.0)
    fail("belief.mass_ceiling must lie in (0, 1]");
  if (c.sensing.max_passes < 1) fail("sensing.max_passes must be at least 1");
  for (const auto& [depth, angle] : c.notches_alg1) {
    if (depth < 0.0) fail("notches_alg1 depth must be nonnegative");
    if (angle < -90.0 || angle > 90.0) fail("notches_alg1 angle outside [-90, 90]");
  }
  for (const auto& [depth, angle] : c.notches_alg2) {
    if (depth < 0.0) fail("notches_alg2 depth must be nonnegative");
    if (angle < -90.0 || angle > 90.0) fail("notches_alg2 angle outside [-90, 90]");
  }
  if (c.absorption.freq_hz.size() != c.absorption.kappa_db_per_m.size())
    fail("absorption table needs one kappa per frequency");
  for (const auto& [r, az] : c.hn_positions) {
    if (r <= 0.0) fail("hn_positions ranges must be positive");
    if (az < -90.0 || az > 90.0) fail("hn_positions azimuths outside [-90, 90]");
  }
}

ScenarioConfig parse_json(const json& root) {
  ScenarioConfig c;

  static const std::set<std::string> top_keys = {
      "fc_hz", "bandwidth_hz", "noise_figure_db", "thermal_noise_dbm_hz", "bs_antennas",
      "rf_chains", "hn_tx_antennas", "hn_rx_antennas", "num_hns", "streams",
      "tx_power_cap_w", "pa_efficiency", "secrecy_threshold", "digital_boost_db",
      "digital_boost_enabled", "notches_alg1", "notches_alg2", "runtime_notch_depth_alg1_db",
      "runtime_notch_depth_alg2_db", "num_slots", "num_seeds", "base_seed", "eve_ranges_m",
      "eve_start_deg", "eve_drift_deg", "eve_pred_range_factor", "include_map_phantom_eve",
      "power_alpha", "power_beta", "power_gamma", "hn_max_power_w", "leak_cap_fraction",
      "dl_ul_ratio", "coverage_radius_m", "hn_sector_deg", "hn_range_min_m", "hn_positions",
      "shadowing_sigma_db", "num_paths", "nlos_attenuation_db", "los_phase_only",
      "csi_eps_legit_frac", "csi_eps_eve_frac", "absorption", "belief", "sensing", "weights",
      "jam_max_targets", "alg1_taper", "pred_bin_stride"};
  reject_unknown(root, top_keys, "");

  if (root.contains("fc_hz")) {
    const json& f = root.at("fc_hz");
    c.fc_hz.clear();
    if (f.is_array())
      for (const auto& v : f) c.fc_hz.push_back(v.get<double>());
    else
      c.fc_hz.push_back(f.get<double>());
  }
  take(root, "bandwidth_hz", c.bandwidth_hz);
  take(root, "noise_figure_db", c.noise_figure_db);
  take(root, "thermal_noise_dbm_hz", c.thermal_noise_dbm_hz);
  take(root, "bs_antennas", c.bs_antennas);
  take(root, "rf_chains", c.rf_chains);
  take(root, "hn_tx_antennas", c.hn_tx_antennas);
  take(root, "hn_rx_antennas", c.hn_rx_antennas);
  take(root, "num_hns", c.num_hns);
  take(root, "streams", c.streams);
  take(root, "tx_power_cap_w", c.tx_power_cap_w);
  take(root, "pa_efficiency", c.pa_efficiency);
  take(root, "secrecy_threshold", c.secrecy_threshold);
  take(root, "digital_boost_db", c.digital_boost_db);
  take(root, "digital_boost_enabled", c.digital_boost_enabled);
  take_pairs(root, "notches_alg1", c.notches_alg1);
  take_pairs(root, "notches_alg2", c.notches_alg2);
  take(root, "runtime_notch_depth_alg1_db", c.runtime_notch_depth_alg1_db);
  take(root, "runtime_notch_depth_alg2_db", c.runtime_notch_depth_alg2_db);
  take(root, "num_slots", c.num_slots);
  take(root, "num_seeds", c.num_seeds);
  take(root, "base_seed", c.base_seed);
  take(root, "eve_ranges_m", c.eve_ranges_m);
  take(root, "eve_start_deg", c.eve_start_deg);
  take(root, "eve_drift_deg", c.eve_drift_deg);
  take(root, "eve_pred_range_factor", c.eve_pred_range_factor);
  take(root, "include_map_phantom_eve", c.include_map_phantom_eve);
  take(root, "power_alpha", c.power_alpha);
  take(root, "power_beta", c.power_beta);
  take(root, "power_gamma", c.power_gamma);
  take(root, "hn_max_power_w", c.hn_max_power_w);
  take(root, "leak_cap_fraction", c.leak_cap_fraction);
  if (root.contains("dl_ul_ratio")) {
    const std::string ratio = root.at("dl_ul_ratio").get<std::string>();
    const auto colon = ratio.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("config: dl_ul_ratio must look like \"3:1\"");
    c.dl_slots = std::stoi(ratio.substr(0, colon));
    c.ul_slots = std::stoi(ratio.substr(colon + 1));
  }
  take(root, "coverage_radius_m", c.coverage_radius_m);
  take(root, "hn_sector_deg", c.hn_sector_deg);
  take(root, "hn_range_min_m", c.hn_range_min_m);
  take_pairs(root, "hn_positions", c.hn_positions);
  take(root, "shadowing_sigma_db", c.shadowing_sigma_db);
  take(root, "num_paths", c.num_paths);
  take(root, "nlos_attenuation_db", c.nlos_attenuation_db);
  take(root, "los_phase_only", c.los_phase_only);
  take(root, "csi_eps_legit_frac", c.csi_eps_legit_frac);
  take(root, "csi_eps_eve_frac", c.csi_eps_eve_frac);

  if (root.contains("absorption")) {
    const json& a = root.at("absorption");
    reject_unknown(a, {"freq_ghz", "kappa_db_per_m"}, "absorption.");
    std::vector<double> ghz;
    take(a, "freq_ghz", ghz);
    take(a, "kappa_db_per_m", c.absorption.kappa_db_per_m);
    if (!ghz.empty()) {
      c.absorption.freq_hz.clear();
      for (double g : ghz) c.absorption.freq_hz.push_back(g * 1e9);
    }
  }
  if (root.contains("belief")) {
    const json& b = root.at("belief");
    reject_unknown(b,
                   {"num_bins", "sigma0_deg", "sigma_min_deg", "sigma_max_deg", "k_expand",
                    "k_exploit", "k_min", "k_max", "conf_threshold", "gamma_min", "gamma_max",
                    "entropy_target_frac", "uniform_mix", "mass_ceiling"},
                   "belief.");
    take(b, "num_bins", c.belief.num_bins);
    take(b, "sigma0_deg", c.belief.sigma0_deg);
    take(b, "sigma_min_deg", c.belief.sigma_min_deg);
    take(b, "sigma_max_deg", c.belief.sigma_max_deg);
    take(b, "k_expand", c.belief.k_expand);
    take(b, "k_exploit", c.belief.k_exploit);
    take(b, "k_min", c.belief.k_min);
    take(b, "k_max", c.belief.k_max);
    take(b, "conf_threshold", c.belief.conf_threshold);
    take(b, "gamma_min", c.belief.gamma_min);
    take(b, "gamma_max", c.belief.gamma_max);
    take(b, "entropy_target_frac", c.belief.entropy_target_frac);
    take(b, "uniform_mix", c.belief.uniform_mix);
    take(b, "mass_ceiling", c.belief.mass_ceiling);
  }
  if (root.contains("sensing")) {
    const json& s = root.at("sensing");
    reject_unknown(s,
                   {"snr_sens_db", "sigma_meas_deg", "sigma_look_deg", "miss_depth",
                    "noise_level", "max_passes", "patrol_period"},
                   "sensing.");
    take(s, "snr_sens_db", c.sensing.snr_sens_db);
    take(s, "sigma_meas_deg", c.sensing.sigma_meas_deg);
    take(s, "sigma_look_deg", c.sensing.sigma_look_deg);
    take(s, "miss_depth", c.sensing.miss_depth);
    take(s, "noise_level", c.sensing.noise_level);
    take(s, "max_passes", c.sensing.max_passes);
    take(s, "patrol_period", c.sensing.patrol_period);
  }
  if (root.contains("weights")) {
    const json& w = root.at("weights");
    reject_unknown(w,
                   {"secrecy", "jam_power", "max_secrecy", "avg_secrecy", "outage", "entropy",
                    "complexity", "dual_step_outage", "dual_step_entropy"},
                   "weights.");
    take(w, "secrecy", c.weights.secrecy);
    take(w, "jam_power", c.weights.jam_power);
    take(w, "max_secrecy", c.weights.max_secrecy);
    take(w, "avg_secrecy", c.weights.avg_secrecy);
    take(w, "outage", c.weights.outage);
    take(w, "entropy", c.weights.entropy);
    take(w, "complexity", c.weights.complexity);
    take(w, "dual_step_outage", c.weights.dual_step_outage);
    take(w, "dual_step_entropy", c.weights.dual_step_entropy);
  }
  take(root, "jam_max_targets", c.jam_max_targets);
  take(root, "alg1_taper", c.alg1_taper);
  take(root, "pred_bin_stride", c.pred_bin_stride);

  validate(c);
  return c;
}

} // namespace

ScenarioConfig parse_config_text(const std::string& text) {
  std::string trimmed = text;
  trimmed.erase(0, trimmed.find_first_not_of(" \t\r\n"));
  if (trimmed.empty()) return parse_json(json::object());
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: parse error: ") + e.what());
  }
  if (!root.is_object()) throw std::invalid_argument("config: top level must be an object");
  return parse_json(root);
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::vector<std::string> config_warnings(const ScenarioConfig& cfg) {
  std::vector<std::string> warnings;
  for (double fc : cfg.fc_hz) {
    if (fc < 28e9 || fc > 410e9) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "fc = %.3g Hz outside the supported 28-410 GHz band",
                    fc);
      warnings.push_back(buf);
    }
    const auto carrier = geom::CarrierSpec::make(fc);
    const auto array = geom::ArrayGeometry::ula_half_wavelength(cfg.bs_antennas, carrier);
    const double boundary = geom::rayleigh_boundary(array.aperture_m(), carrier.wavelength_m);
    double max_range = 0.0;
    for (const auto& [r, az] : cfg.hn_positions) max_range = std::max(max_range, r);
    if (cfg.hn_positions.size() < static_cast<std::size_t>(cfg.num_hns))
      max_range = std::max(max_range, cfg.coverage_radius_m);
    if (max_range > boundary) {
      char buf[192];
      std::snprintf(buf, sizeof(buf),
                    "at fc = %.3g Hz nodes up to %.1f m exceed the Rayleigh boundary %.1f m; "
                    "spherical-wavefront math stays valid but focusing degenerates to steering",
                    fc, max_range, boundary);
      warnings.push_back(buf);
    }
  }
  return warnings;
}

// ---------------------------------------------------------------------------
// CSV / summary emission

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

} // namespace

std::string to_csv(const std::vector<KpiRow>& rows) {
  std::string out =
      "controller,fc_hz,seed,slot,mean_secrecy,max_secrecy,outage,success_rate,entropy,"
      "comm_power_w,sensing_power_w,fj_power_w,total_power_w,n_jammers,leader_utility,"
      "final_utility,wall_ms\n";
  for (const auto& r : rows) {
    out += r.controller;
    out += ',';
    out += fmt(r.fc_hz);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += std::to_string(r.slot);
    const auto& k = r.kpis;
    for (double v : {k.mean_secrecy, k.max_secrecy, k.outage_prob, k.success_rate,
                     k.entropy_bits, k.comm_power_w, k.sensing_power_w, k.fj_power_w,
                     k.total_power_w}) {
      out += ',';
      out += fmt(v);
    }
    out += ',';
    out += std::to_string(k.active_jammers);
    for (double v : {k.leader_utility, k.final_utility, k.wall_ms}) {
      out += ',';
      out += fmt(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<KpiRow> parse_csv(const std::string& csv) {
  std::vector<KpiRow> rows;
  std::stringstream ss(csv);
  std::string line;
  bool header = true;
  while (std::getline(ss, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ls, field, ',')) f.push_back(field);
    if (f.size() != 17) throw std::invalid_argument("csv: malformed row: " + line);
    KpiRow r;
    r.controller = f[0];
    r.fc_hz = std::stod(f[1]);
    r.seed = std::stoull(f[2]);
    r.slot = std::stoi(f[3]);
    r.kpis.mean_secrecy = std::stod(f[4]);
    r.kpis.max_secrecy = std::stod(f[5]);
    r.kpis.outage_prob = std::stod(f[6]);
    r.kpis.success_rate = std::stod(f[7]);
    r.kpis.entropy_bits = std::stod(f[8]);
    r.kpis.comm_power_w = std::stod(f[9]);
    r.kpis.sensing_power_w = std::stod(f[10]);
    r.kpis.fj_power_w = std::stod(f[11]);
    r.kpis.total_power_w = std::stod(f[12]);
    r.kpis.active_jammers = std::stoi(f[13]);
    r.kpis.leader_utility = std::stod(f[14]);
    r.kpis.final_utility = std::stod(f[15]);
    r.kpis.wall_ms = std::stod(f[16]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string summary_json(const std::vector<KpiRow>& rows) {
  std::map<std::pair<std::string, double>, std::vector<metrics::SlotKpis>> groups;
  for (const auto& r : rows) groups[{r.controller, r.fc_hz}].push_back(r.kpis);

  json out;
  out["schema"] = "nfisac-summary-v1";
  out["groups"] = json::array();
  for (const auto& [key, kpis] : groups) {
    json g;
    g["controller"] = key.first;
    g["fc_hz"] = key.second;
    g["slots"] = kpis.size();
    json stats;
    for (const auto& [name, st] : metrics::aggregate(kpis)) {
      stats[name] = {{"mean", st.mean}, {"stddev", st.stddev}, {"min", st.min},
                     {"max", st.max}, {"count", st.count}};
    }
    g["kpis"] = std::move(stats);
    out["groups"].push_back(std::move(g));
  }
  return out.dump(2);
}

void emit_results(const CampaignResult& result, const std::string& out_dir) {
  if (result.rows.empty()) throw std::invalid_argument("emit_results: empty KPI table");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("emit_results: cannot create directory '" + out_dir + "'");

  auto write_file = [&](const std::string& name, const std::string& content) {
    const fs::path p = fs::path(out_dir) / name;
    std::ofstream out(p);
    if (!out) throw std::runtime_error("emit_results: cannot write '" + p.string() + "'");
    out << content;
  };

  write_file("results.csv", to_csv(result.rows));
  write_file("summary.json", summary_json(result.rows));
  for (const auto& [key, rows] : result.belief_dumps) {
    std::string content = "slot,bin,prob\n";
    for (const auto& [slot, bin, prob] : rows) {
      content += std::to_string(slot);
      content += ',';
      content += std::to_string(bin);
      content += ',';
      content += fmt(prob);
      content += '\n';
    }
    write_file("belief_" + key + ".csv", content);
  }
}

} // namespace nfisac::scenario
