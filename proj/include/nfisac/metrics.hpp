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

#ifndef NFISAC_METRICS_HPP
#define NFISAC_METRICS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace nfisac::metrics {

struct SlotKpis {
  std::vector<double> per_hn_secrecy; // bits/s/Hz, active receivers
  double mean_secrecy = 0.0;
  double max_secrecy = 0.0;
  double outage_prob = 0.0;   // P_out in [0,1]
  double success_rate = 100.0; // 100 (1 - P_out)
  double entropy_bits = 0.0;
  double comm_power_w = 0.0;    // radiated
  double sensing_power_w = 0.0; // radiated
  double fj_power_w = 0.0;      // radiated
  double total_power_w = 0.0;   // consumed, (comm+sensing+fj)/eta_PA
  double complexity = 0.0;      // C_t in [0,1]
  double leader_utility = 0.0;
  double final_utility = 0.0;
  int active_jammers = 0;
  double wall_ms = 0.0;
  std::string flags; // degenerate-branch markers, never aborts a slot
};

struct OutageResult {
  std::vector<int> indicators;
  double fraction = 0.0;
};

// I_out(u) = 1{R_s(u) < R_th}; P_out = mean indicator.
OutageResult outage(const std::vector<double>& per_hn_secrecy, double secrecy_threshold);

struct PowerBreakdown {
  double comm_w = 0.0;
  double sensing_w = 0.0;
  double fj_w = 0.0;
  double total_w = 0.0;
};

// Consumed power: all radiated components divided by the PA efficiency.
PowerBreakdown power_account(double comm_radiated_w, double sensing_radiated_w,
                             double fj_radiated_w, double pa_efficiency);

struct KpiStats {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

// Per-KPI summary over a group of slots. Deterministic given inputs.
std::map<std::string, KpiStats> aggregate(const std::vector<SlotKpis>& kpis);

} // namespace nfisac::metrics

#endif // NFISAC_METRICS_HPP
