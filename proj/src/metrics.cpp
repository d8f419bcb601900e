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

#include "nfisac/metrics.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace nfisac::metrics {

OutageResult outage(const std::vector<double>& per_hn_secrecy, double secrecy_threshold) {
  if (per_hn_secrecy.empty()) throw std::invalid_argument("outage: empty secrecy list");
  OutageResult res;
  res.indicators.reserve(per_hn_secrecy.size());
  int failing = 0;
  for (double r : per_hn_secrecy) {
    const int out = r < secrecy_threshold ? 1 : 0;
    res.indicators.push_back(out);
    failing += out;
  }
  res.fraction = static_cast<double>(failing) / per_hn_secrecy.size();
  return res;
}

PowerBreakdown power_account(double comm_radiated_w, double sensing_radiated_w,
                             double fj_radiated_w, double pa_efficiency) {
  if (pa_efficiency <= 0.0 || pa_efficiency > 1.0)
    throw std::domain_error("power_account: PA efficiency outside (0,1]");
  PowerBreakdown pb;
  pb.comm_w = comm_radiated_w;
  pb.sensing_w = sensing_radiated_w;
  pb.fj_w = fj_radiated_w;
  pb.total_w = (comm_radiated_w + sensing_radiated_w + fj_radiated_w) / pa_efficiency;
  return pb;
}

std::map<std::string, KpiStats> aggregate(const std::vector<SlotKpis>& kpis) {
  if (kpis.empty()) throw std::invalid_argument("aggregate: empty KPI list");

  const std::vector<std::pair<std::string, std::function<double(const SlotKpis&)>>> fields = {
      {"mean_secrecy", [](const SlotKpis& k) { return k.mean_secrecy; }},
      {"max_secrecy", [](const SlotKpis& k) { return k.max_secrecy; }},
      {"outage", [](const SlotKpis& k) { return k.outage_prob; }},
      {"success_rate", [](const SlotKpis& k) { return k.success_rate; }},
      {"entropy", [](const SlotKpis& k) { return k.entropy_bits; }},
      {"comm_power_w", [](const SlotKpis& k) { return k.comm_power_w; }},
      {"sensing_power_w", [](const SlotKpis& k) { return k.sensing_power_w; }},
      {"fj_power_w", [](const SlotKpis& k) { return k.fj_power_w; }},
      {"total_power_w", [](const SlotKpis& k) { return k.total_power_w; }},
      {"complexity", [](const SlotKpis& k) { return k.complexity; }},
      {"leader_utility", [](const SlotKpis& k) { return k.leader_utility; }},
      {"final_utility", [](const SlotKpis& k) { return k.final_utility; }},
      {"n_jammers", [](const SlotKpis& k) { return static_cast<double>(k.active_jammers); }},
      {"wall_ms", [](const SlotKpis& k) { return k.wall_ms; }},
  };

  std::map<std::string, KpiStats> out;
  for (const auto& [name, get] : fields) {
    KpiStats st;
    st.count = kpis.size();
    st.min = std::numeric_limits<double>::infinity();
    st.max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& k : kpis) {
      const double v = get(k);
      sum += v;
      st.min = std::min(st.min, v);
      st.max = std::max(st.max, v);
    }
    st.mean = sum / kpis.size();
    double var = 0.0;
    for (const auto& k : kpis) {
      const double d = get(k) - st.mean;
      var += d * d;
    }
    st.stddev = std::sqrt(var / kpis.size());
    out[name] = st;
  }
  return out;
}

} // namespace nfisac::metrics
