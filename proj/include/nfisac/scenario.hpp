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

#ifndef NFISAC_SCENARIO_HPP
#define NFISAC_SCENARIO_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nfisac/belief.hpp"
#include "nfisac/geometry.hpp"
#include "nfisac/metrics.hpp"

namespace nfisac::scenario {

struct GameWeights {
  double secrecy = 1.0;      // omega_R on min secrecy (leader utility)
  double jam_power = 0.02;   // omega_J per watt
  double max_secrecy = 0.5;  // omega_max
  double avg_secrecy = 1.0;  // omega_avg
  double outage = 2.0;       // omega_O
  double entropy = 0.1;      // omega_H
  double complexity = 0.1;   // omega_C
  double dual_step_outage = 0.1;  // mu_O
  double dual_step_entropy = 0.05; // mu_H
};

struct SensingConfig {
  double snr_sens_db = 10.0;
  double sigma_meas_deg = 2.0;
  double sigma_look_deg = 4.0;
  double miss_depth = 0.7;
  double noise_level = 0.15;
  int max_passes = 2;
  int patrol_period = 0; // >0: force a sensing firing every N slots
};

struct BeliefConfig {
  int num_bins = 181;
  double sigma0_deg = 5.0;
  double sigma_min_deg = 1.0;
  double sigma_max_deg = 20.0;
  double k_expand = 0.5;
  double k_exploit = 0.2;
  double k_min = 1.0;
  double k_max = 4.0;
  double conf_threshold = 0.9;
  double gamma_min = 0.1;
  double gamma_max = 0.5;
  double entropy_target_frac = 0.3; // H_star = frac * log2(num_bins)
  double uniform_mix = 0.0;
  double mass_ceiling = 1.0;

  belief::BeliefHyperparams to_hyperparams() const;
};

// Full scenario description. Defaults reproduce the reference system setup:
// 128-antenna / 64-chain base station, 16x16 hybrid nodes, 24 nodes, 6
// streams, 50.12 W cap, 0.38 PA efficiency, 500 MHz, 7 dB NF, -174 dBm/Hz,
// secrecy threshold 1 bit/s/Hz.
struct ScenarioConfig {
  std::vector<double> fc_hz{100e9};
  double bandwidth_hz = 500e6;
  double noise_figure_db = 7.0;
  double thermal_noise_dbm_hz = -174.0;
  int bs_antennas = 128;
  int rf_chains = 64;
  int hn_tx_antennas = 16;
  int hn_rx_antennas = 16;
  int num_hns = 24;
  int streams = 6;
  double tx_power_cap_w = 50.12;
  double pa_efficiency = 0.38;
  double secrecy_threshold = 1.0;
  double digital_boost_db = 20.0;   // headroom knob; no equation consumes it
  bool digital_boost_enabled = false;

  // (depth_db, angle_deg) pairs
  std::vector<std::pair<double, double>> notches_alg1{{26.0, 18.0}, {24.0, 20.0}};
  std::vector<std::pair<double, double>> notches_alg2{{30.0, 14.0}, {28.0, 16.0}};
  double runtime_notch_depth_alg1_db = 26.0;
  double runtime_notch_depth_alg2_db = 30.0;

  int num_slots = 50;
  int num_seeds = 10;
  std::uint64_t base_seed = 1;

  std::vector<double> eve_ranges_m{25.0, 40.0};
  std::vector<double> eve_start_deg{-20.0, 30.0};
  double eve_drift_deg = 1.5;
  double eve_pred_range_factor = 0.7;
  bool include_map_phantom_eve = true;

  double power_alpha = 0.70;
  double power_beta = 0.10;
  double power_gamma = 0.20;
  double hn_max_power_w = 2.0;
  double leak_cap_fraction = 0.05;
  int dl_slots = 3; // DL:UL ratio, slot-level abstraction only
  int ul_slots = 1;

  double coverage_radius_m = 100.0;
  double hn_sector_deg = 60.0;
  double hn_range_min_m = 20.0;
  std::vector<std::pair<double, double>> hn_positions; // explicit (range_m, azimuth_deg)

  double shadowing_sigma_db = 4.0;
  int num_paths = 3;
  double nlos_attenuation_db = 10.0;
  bool los_phase_only = true;
  double csi_eps_legit_frac = 0.01;
  double csi_eps_eve_frac = 0.05;

  geom::AbsorptionTable absorption;
  BeliefConfig belief;
  SensingConfig sensing;
  GameWeights weights;

  int jam_max_targets = 4;
  double alg1_taper = 0.5;
  int pred_bin_stride = 1;

  double noise_power_w() const;
  double fj_max_w() const { return power_beta * tx_power_cap_w; }
  int num_eves() const { return static_cast<int>(eve_ranges_m.size()); }
};

// Parses and fully validates a config file (JSON key-value; an empty file
// yields all defaults). Unknown keys are rejected with the offending path;
// violated invariants name the key and constraint.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text);

// Non-fatal advisories (e.g. fc outside the supported 28-410 GHz band,
// nodes beyond the Rayleigh boundary of the configured array).
std::vector<std::string> config_warnings(const ScenarioConfig& cfg);

struct KpiRow {
  std::string controller;
  double fc_hz = 0.0;
  std::uint64_t seed = 0;
  int slot = 0;
  metrics::SlotKpis kpis;
};

struct CampaignResult {
  std::vector<KpiRow> rows;
  std::vector<std::string> run_errors;
  // optional per-slot belief snapshots: (controller, fc, seed) -> rows of
  // (slot, bin, prob)
  std::map<std::string, std::vector<std::tuple<int, int, double>>> belief_dumps;
};

// Runs every (controller, fc, seed) cell of the campaign. Identical seeds see
// identical worlds across controllers; cells execute on a small thread pool
// (NFISAC_THREADS overrides the worker count) and merge in sorted key order.
CampaignResult run_campaign(const ScenarioConfig& cfg,
                            const std::vector<std::string>& controllers,
                            bool dump_beliefs = false);

// CSV serialization of the per-slot KPI table (stable column schema).
std::string to_csv(const std::vector<KpiRow>& rows);
std::vector<KpiRow> parse_csv(const std::string& csv);

// Writes results.csv, summary.json and optional belief dumps into out_dir.
void emit_results(const CampaignResult& result, const std::string& out_dir);

// Aggregated summary grouped by (controller, fc): JSON text.
std::string summary_json(const std::vector<KpiRow>& rows);

} // namespace nfisac::scenario

#endif // NFISAC_SCENARIO_HPP
