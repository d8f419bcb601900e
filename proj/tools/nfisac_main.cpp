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

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "nfisac/scenario.hpp"

namespace {

constexpr double kSweepGridHz[] = {28e9, 60e9, 120e9, 220e9, 300e9, 340e9, 410e9};

nfisac::scenario::ScenarioConfig load_or_default(const std::string& path) {
  if (path.empty()) return nfisac::scenario::parse_config_text("");
  return nfisac::scenario::load_config(path);
}

void print_warnings(const nfisac::scenario::ScenarioConfig& cfg) {
  for (const auto& w : nfisac::scenario::config_warnings(cfg))
    std::cerr << "warning: " << w << "\n";
}

int run_cells(nfisac::scenario::ScenarioConfig cfg, const std::vector<std::string>& controllers,
              const std::string& out_dir, bool dump_beliefs) {
  print_warnings(cfg);
  const auto result = nfisac::scenario::run_campaign(cfg, controllers, dump_beliefs);
  for (const auto& e : result.run_errors) std::cerr << "run failure: " << e << "\n";
  nfisac::scenario::emit_results(result, out_dir);
  std::cout << "wrote " << result.rows.size() << " KPI rows to " << out_dir << "\n";
  return result.run_errors.empty() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"nfisac: secure near-field MIMO ISAC simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> controllers = {"baseline", "alg1_no_sensing", "alg1", "alg2"};
  int seeds_override = 0;
  int slots_override = 0;
  std::vector<double> fc_override;
  bool dump_beliefs = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "scenario config file (JSON)");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--controllers", controllers,
                    "subset of baseline, alg1_no_sensing, alg1, alg2")
        ->delimiter(',');
    cmd->add_option("--seeds", seeds_override, "override num_seeds");
    cmd->add_option("--slots", slots_override, "override num_slots");
    cmd->add_option("--fc", fc_override, "override carrier frequencies (Hz)")->delimiter(',');
    cmd->add_flag("--dump-beliefs", dump_beliefs, "write per-slot belief trajectories");
  };

  CLI::App* run = app.add_subcommand("run", "run a KPI campaign");
  add_common(run);
  CLI::App* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("--config", config_path, "scenario config file (JSON)");
  CLI::App* sweep = app.add_subcommand("sweep", "run the 28-410 GHz frequency grid");
  add_common(sweep);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      const auto cfg = load_or_default(config_path);
      print_warnings(cfg);
      std::cout << "config ok: " << cfg.num_hns << " nodes, " << cfg.streams << " streams, "
                << cfg.fc_hz.size() << " carrier(s)\n";
      return 0;
    }
    auto cfg = load_or_default(config_path);
    if (seeds_override > 0) cfg.num_seeds = seeds_override;
    if (slots_override > 0) cfg.num_slots = slots_override;
    if (!fc_override.empty()) cfg.fc_hz = fc_override;
    if (sweep->parsed()) {
      cfg.fc_hz.assign(std::begin(kSweepGridHz), std::end(kSweepGridHz));
    }
    return run_cells(std::move(cfg), controllers, out_dir, dump_beliefs);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2; // config / argument problem
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
