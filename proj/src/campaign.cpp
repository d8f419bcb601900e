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

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "nfisac/game.hpp"
#include "nfisac/scenario.hpp"

namespace nfisac::scenario {

namespace {

int worker_count(std::size_t cells) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NFISAC_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) n = v;
  }
  if (n < 1) n = 1;
  return static_cast<int>(std::min<std::size_t>(n, std::max<std::size_t>(cells, 1)));
}

} // namespace

CampaignResult run_campaign(const ScenarioConfig& cfg,
                            const std::vector<std::string>& controllers, bool dump_beliefs) {
  struct Cell {
    game::Controller controller;
    double fc = 0.0;
    std::uint64_t seed = 0;
  };
  std::vector<Cell> cells;
  for (const auto& name : controllers) {
    const game::Controller ctrl = game::parse_controller(name);
    for (double fc : cfg.fc_hz) {
      for (int s = 0; s < cfg.num_seeds; ++s) {
        cells.push_back({ctrl, fc, cfg.base_seed + static_cast<std::uint64_t>(s)});
      }
    }
  }

  CampaignResult result;
  std::mutex merge_mutex;
  std::atomic<std::size_t> next{0};

  auto run_cell = [&](const Cell& cell) {
    std::vector<KpiRow> rows;
    std::vector<std::tuple<int, int, double>> bel_rows;
    const game::World world(cfg, cell.fc, cell.seed);
    game::ControllerState state(cfg);
    for (int slot = 0; slot < cfg.num_slots; ++slot) {
      KpiRow row;
      row.controller = game::controller_name(cell.controller);
      row.fc_hz = cell.fc;
      row.seed = cell.seed;
      row.slot = slot;
      row.kpis = cell.controller == game::Controller::Baseline
                     ? game::baseline_controller(world, slot)
                     : game::run_slot(world, cell.controller, slot, state);
      rows.push_back(std::move(row));
      if (dump_beliefs && cell.controller != game::Controller::Baseline) {
        for (int b = 0; b < state.bel.size(); ++b)
          bel_rows.emplace_back(slot, b, state.bel.probs[b]);
      }
    }
    std::lock_guard<std::mutex> lock(merge_mutex);
    for (auto& r : rows) result.rows.push_back(std::move(r));
    if (dump_beliefs && !bel_rows.empty()) {
      char key[128];
      std::snprintf(key, sizeof(key), "%s_%.0fMHz_seed%llu",
                    game::controller_name(cell.controller).c_str(), cell.fc / 1e6,
                    static_cast<unsigned long long>(cell.seed));
      result.belief_dumps[key] = std::move(bel_rows);
    }
  };

  const int workers = worker_count(cells.size());
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cells.size()) break;
        try {
          run_cell(cells[i]);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(merge_mutex);
          result.run_errors.push_back(
              game::controller_name(cells[i].controller) + " fc=" +
              std::to_string(cells[i].fc) + " seed=" + std::to_string(cells[i].seed) + ": " +
              e.what());
        }
      }
    });
  }
  for (auto& t : pool) t.join();

  std::sort(result.rows.begin(), result.rows.end(), [](const KpiRow& a, const KpiRow& b) {
    if (a.controller != b.controller) return a.controller < b.controller;
    if (a.fc_hz != b.fc_hz) return a.fc_hz < b.fc_hz;
    if (a.seed != b.seed) return a.seed < b.seed;
    return a.slot < b.slot;
  });
  return result;
}

} // namespace nfisac::scenario
