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

#ifndef NFISAC_GAME_HPP
#define NFISAC_GAME_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "nfisac/beamforming.hpp"
#include "nfisac/belief.hpp"
#include "nfisac/geometry.hpp"
#include "nfisac/metrics.hpp"
#include "nfisac/scenario.hpp"

namespace nfisac::game {

enum class Controller { Baseline, Alg1NoSensing, Alg1, Alg2 };

std::string controller_name(Controller c);
Controller parse_controller(const std::string& name);

enum class NodeRole { LegitimateReceiver, FriendlyJammer };

// Compact per-slot policy announced by the leader.
struct LeaderPolicy {
  double sensing_weight = 0.1; // gamma_t
  std::vector<bf::NotchSpec> protected_angles; // B_t
  double leak_cap = 0.05; // rho_leak
};

// Dual variables with projected (nonnegative) ascent.
struct DualState {
  double lambda_outage = 0.0;  // lambda_O
  double lambda_entropy = 0.0; // lambda_H
  double step_outage = 0.1;    // mu_O
  double step_entropy = 0.05;  // mu_H
};

struct NodeState {
  int id = 0;
  Vec3 position = Vec3::Zero();
  NodeRole role = NodeRole::LegitimateReceiver;
  double predicted_secrecy = 0.0; // R_hat
  double max_power_w = 2.0;       // P_u^max
};

struct PowerBudget {
  double alpha = 0.70;
  double beta = 0.10;
  double gamma = 0.20;
  double tx_cap_w = 50.12;
  double fj_max_w = 5.012;
  double pa_efficiency = 0.38;
};

// Deterministic world for one (fc, seed): node layout, eavesdropper drift
// trajectories, shadowing, and on-demand channel synthesis. Every random
// quantity is a pure function of (seed, slot, link), so any two controllers
// replay the identical world and lazy synthesis stays order-independent.
class World {
public:
  World(const scenario::ScenarioConfig& cfg, double fc_hz, std::uint64_t seed);

  const scenario::ScenarioConfig& cfg() const { return *cfg_; }
  const geom::CarrierSpec& carrier() const { return carrier_; }
  const geom::ArrayGeometry& bs_array() const { return bs_array_; }
  const geom::ArrayGeometry& hn_array() const { return hn_array_; }
  std::uint64_t seed() const { return seed_; }

  int num_hns() const { return static_cast<int>(hn_positions_.size()); }
  int num_eves() const { return static_cast<int>(eve_ranges_.size()); }
  int num_scheduled() const { return std::min(cfg_->streams, num_hns()); }
  const Vec3& hn_position(int u) const { return hn_positions_[u]; }
  double hn_range(int u) const { return hn_positions_[u].norm(); }
  double hn_azimuth_deg(int u) const { return azimuth_deg_of(hn_positions_[u]); }
  double eve_angle_deg(int slot, int e) const;
  double eve_range(int e) const { return eve_ranges_[e]; }
  Vec3 eve_position(int slot, int e) const;
  double mean_scheduled_range() const;

  geom::ChannelMatrix bs_to_hn(int slot, int u) const;
  geom::ChannelMatrix bs_to_eve(int slot, int e) const;
  geom::ChannelMatrix bs_to_phantom(int slot, const Vec3& position) const;
  geom::ChannelMatrix hn_to_hn(int slot, int from, int to) const;
  geom::ChannelMatrix hn_to_eve(int slot, int from, int e) const;
  geom::CsiEstimate estimate_bs_to_hn(int slot, int u) const;

  // Fingerprint of the slot's legit channels; used by pairing tests.
  double world_fingerprint(int slot) const;

  // Per-node steering cache for the belief-expectation in predict_secrecy:
  // columns are the steering vectors toward (pred-range, bin azimuth) on the
  // thinned bin grid. Angles and node ranges are static per world.
  const MatXc* pred_steering(int u) const;

private:
  const scenario::ScenarioConfig* cfg_;
  geom::CarrierSpec carrier_;
  geom::ArrayGeometry bs_array_;
  geom::ArrayGeometry hn_array_;
  std::uint64_t seed_ = 0;
  std::vector<Vec3> hn_positions_;
  std::vector<double> eve_ranges_;
  std::vector<std::vector<double>> eve_angle_track_; // [eve][slot]
  geom::SynthesisOptions synth_;
  mutable std::vector<MatXc> pred_steering_cache_;

  double shadow_db(int kind, int a, int b) const;
};

// Mutable controller-side state threaded through the slot loop.
struct ControllerState {
  belief::AngularBelief bel;
  DualState duals;
  std::vector<bf::NotchSpec> protected_prev;
  int slots_since_sensing = 0;
  explicit ControllerState(const scenario::ScenarioConfig& cfg);
};

// Belief-expected secrecy prediction for one node: the legitimate SINR comes
// from estimated CSI and the current precoders; the eavesdropper SINR is
// evaluated at each belief bin (nominal range: eve_pred_range_factor x the
// node's own range) and averaged under the belief. Friendly jamming is not
// presumed, which keeps the follower indicator stable across slots.
double predict_secrecy(const NodeState& node, const geom::CsiEstimate& csi,
                       const belief::AngularBelief& bel, const MatXc& precoder_columns,
                       int stream_of_node, const geom::ArrayGeometry& bs,
                       const geom::CarrierSpec& carrier, double noise_w,
                       double eve_range_m, int bin_stride,
                       const MatXc* steering_cache = nullptr);

// Jam(u) = 1{R_hat < R_th}; strict inequality.
NodeRole follower_best_response(double predicted_secrecy, double secrecy_threshold);

// lambda_O <- [lambda_O + mu_O (R_th - mean_secrecy)]_+ and
// lambda_H <- [lambda_H + mu_H (H - H_star)]_+.
DualState dual_update(const DualState& duals, double mean_secrecy, double entropy_bits,
                      double secrecy_threshold, double entropy_target_bits);

// omega_R min_u R_s - omega_J P_FJ - lambda_H [H - H_star]_+.
double leader_utility(double min_secrecy, double fj_power_w, double entropy_bits,
                      const scenario::GameWeights& weights, double lambda_entropy,
                      double entropy_target_bits);

// omega_max R_max + omega_avg R_avg - omega_O P_out - omega_H H - omega_C C_t
//   - lambda_O [R_th - R_avg]_+ - lambda_H [H - H_star]_+.
double final_utility(const metrics::SlotKpis& kpis, const scenario::GameWeights& weights,
                     const DualState& duals, double complexity_cost,
                     double secrecy_threshold, double entropy_target_bits);

struct FjJammer {
  int id = 0;
  VecXc beam;        // scaled so ||g||^2 is the jammer's radiated power
  double power_w = 0.0;
  std::vector<bf::JamTarget> targets; // retained for notch-deepening rebuilds
  std::vector<bf::NotchSpec> protected_angles;
};

struct FjEnforcementResult {
  std::vector<FjJammer> jammers;
  double total_power_w = 0.0;
  int deactivated_id = -1;
  bool infeasible = false;
  int notch_iterations = 0;
};

// Power and leakage constraints on the candidate jammer set: proportional
// scaling onto the FJ budget, then per-receiver leakage capping by
// iteratively deepening notches toward the violated receiver (up to 3
// rounds), then power scaling, then deactivating the worst offender.
FjEnforcementResult enforce_fj_constraints(
    std::vector<FjJammer> jammers, const PowerBudget& budget, double leak_cap_fraction,
    const std::vector<MatXc>& receiver_est_channels_by_jammer_flat,
    const std::vector<VecXc>& receiver_combiners,
    const std::vector<double>& receiver_desired_power_w,
    const geom::ArrayGeometry& hn_array, const geom::CarrierSpec& carrier,
    std::string* flags);

// Intra-slot adaptive sensing & beamforming refinement.
struct AdaptiveResult {
  belief::AngularBelief posterior;
  double gamma_t = 0.1;
  VecXc sensing_weights;
  VecXc comm_weights;
  double sigma_next_deg = 5.0;
  int passes = 0;
  int beams_fired = 0;
  double conf_entry = 0.0;
  bool uninformative = false;
};

AdaptiveResult run_adaptive(const belief::AngularBelief& prior,
                            const scenario::ScenarioConfig& cfg,
                            const std::vector<bf::NotchSpec>& protected_angles,
                            const std::vector<double>& true_eve_angles_deg,
                            const geom::ArrayGeometry& bs, const geom::CarrierSpec& carrier,
                            double sensing_range_m, std::mt19937_64& rng,
                            bool force_fire = false);

// One Stackelberg slot for alg1 / alg2 / alg1_no_sensing.
metrics::SlotKpis run_slot(const World& world, Controller mode, int slot,
                           ControllerState& state);

// Static max-ratio comparison controller: full transmit cap, no belief, no
// sensing, no role switching, no notches. KPIs computed identically.
metrics::SlotKpis baseline_controller(const World& world, int slot);

} // namespace nfisac::game

#endif // NFISAC_GAME_HPP
