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

#include "nfisac/game.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace nfisac::game {

namespace {

// RNG stream tags. Every stochastic quantity in a world is keyed by
// (seed, tag, slot/link ids) so lazy evaluation is order-independent and the
// same seed replays bit-identically under every controller.
enum StreamTag : std::uint64_t {
  kLayout = 0x11,
  kEveTrack = 0x22,
  kShadow = 0x33,
  kBsHn = 0x44,
  kBsEve = 0x55,
  kHnHn = 0x66,
  kHnEve = 0x77,
  kCsiBsHn = 0x88,
  kCsiHnHn = 0x99,
  kPhantomChan = 0xAA,
  kHnPhantom = 0xBB,
  kController = 0xCC,
};

double wrap_angle_deg(double a) {
  while (a > 180.0) a -= 360.0;
  while (a < -180.0) a += 360.0;
  return a;
}

// A ULA cannot distinguish front from back: a direction behind the array
// plane aliases onto the front hemisphere with the same response.
double fold_to_front_deg(double a) {
  a = wrap_angle_deg(a);
  if (a > 90.0) return 180.0 - a;
  if (a < -90.0) return -180.0 - a;
  return a;
}

} // namespace

std::string controller_name(Controller c) {
  switch (c) {
    case Controller::Baseline: return "baseline";
    case Controller::Alg1NoSensing: return "alg1_no_sensing";
    case Controller::Alg1: return "alg1";
    case Controller::Alg2: return "alg2";
  }
  return "unknown";
}

Controller parse_controller(const std::string& name) {
  if (name == "baseline") return Controller::Baseline;
  if (name == "alg1_no_sensing") return Controller::Alg1NoSensing;
  if (name == "alg1") return Controller::Alg1;
  if (name == "alg2") return Controller::Alg2;
  throw std::invalid_argument("unknown controller: " + name);
}

// ---------------------------------------------------------------------------
// World

World::World(const scenario::ScenarioConfig& cfg, double fc_hz, std::uint64_t seed)
    : cfg_(&cfg), seed_(seed) {
  carrier_ = geom::CarrierSpec::make(fc_hz, cfg.absorption.lookup(fc_hz),
                                     cfg.shadowing_sigma_db);
  bs_array_ = geom::ArrayGeometry::ula_half_wavelength(cfg.bs_antennas, carrier_);
  hn_array_ = geom::ArrayGeometry::ula_half_wavelength(cfg.hn_rx_antennas, carrier_);

  synth_.num_paths = cfg.num_paths;
  synth_.nlos_attenuation_db = cfg.nlos_attenuation_db;
  synth_.los_phase_only = cfg.los_phase_only;
  synth_.nlos_spread_m = 0.3 * cfg.coverage_radius_m;

  // Node layout: explicit entries first, annulus draws for the remainder.
  auto rng = make_rng(mix_keys(seed_, kLayout));
  std::uniform_real_distribution<double> urange(cfg.hn_range_min_m, cfg.coverage_radius_m);
  std::uniform_real_distribution<double> uaz(-cfg.hn_sector_deg, cfg.hn_sector_deg);
  hn_positions_.reserve(cfg.num_hns);
  for (int u = 0; u < cfg.num_hns; ++u) {
    if (u < static_cast<int>(cfg.hn_positions.size())) {
      hn_positions_.push_back(
          polar_point(cfg.hn_positions[u].first, cfg.hn_positions[u].second));
    } else {
      hn_positions_.push_back(polar_point(urange(rng), uaz(rng)));
    }
  }

  eve_ranges_ = cfg.eve_ranges_m;
  const int n_eves = static_cast<int>(eve_ranges_.size());
  eve_angle_track_.resize(n_eves);
  for (int e = 0; e < n_eves; ++e) {
    auto erng = make_rng(mix_keys(seed_, kEveTrack, e));
    std::normal_distribution<double> step(0.0, cfg.eve_drift_deg);
    double angle = e < static_cast<int>(cfg.eve_start_deg.size()) ? cfg.eve_start_deg[e]
                                                                  : uaz(erng);
    eve_angle_track_[e].reserve(cfg.num_slots + 1);
    for (int t = 0; t <= cfg.num_slots; ++t) {
      eve_angle_track_[e].push_back(angle);
      if (cfg.eve_drift_deg > 0.0) angle += step(erng);
      // Linear arrays cannot resolve beyond +-90 deg; reflect at the edges.
      if (angle > 88.0) angle = 176.0 - angle;
      if (angle < -88.0) angle = -176.0 - angle;
    }
  }
}

double World::eve_angle_deg(int slot, int e) const {
  const auto& track = eve_angle_track_.at(e);
  return track[std::min<std::size_t>(slot, track.size() - 1)];
}

Vec3 World::eve_position(int slot, int e) const {
  return polar_point(eve_ranges_[e], eve_angle_deg(slot, e));
}

double World::mean_scheduled_range() const {
  const int k = num_scheduled();
  double s = 0.0;
  for (int u = 0; u < k; ++u) s += hn_range(u);
  return k > 0 ? s / k : cfg_->coverage_radius_m;
}

double World::shadow_db(int kind, int a, int b) const {
  auto rng = make_rng(mix_keys(seed_, kShadow, static_cast<std::uint64_t>(kind) * 4096 + a, b));
  std::normal_distribution<double> gauss(0.0, carrier_.shadowing_sigma_db);
  return gauss(rng);
}

geom::ChannelMatrix World::bs_to_hn(int slot, int u) const {
  auto rng = make_rng(mix_keys(seed_, kBsHn, slot, u));
  const double pl = geom::path_loss_db(hn_range(u), carrier_, shadow_db(0, u, 0));
  return geom::synthesize_channel(bs_array_, hn_array_, carrier_, hn_positions_[u], pl,
                                  synth_, rng);
}

geom::ChannelMatrix World::bs_to_eve(int slot, int e) const {
  auto rng = make_rng(mix_keys(seed_, kBsEve, slot, e));
  const Vec3 pos = eve_position(slot, e);
  const double pl = geom::path_loss_db(pos.norm(), carrier_, shadow_db(1, e, 0));
  return geom::synthesize_channel(bs_array_, hn_array_, carrier_, pos, pl, synth_, rng);
}

geom::ChannelMatrix World::bs_to_phantom(int slot, const Vec3& position) const {
  auto rng = make_rng(mix_keys(seed_, kPhantomChan, slot));
  const double pl = geom::path_loss_db(std::max(1.0, position.norm()), carrier_, 0.0);
  return geom::synthesize_channel(bs_array_, hn_array_, carrier_, position, pl, synth_, rng);
}

geom::ChannelMatrix World::hn_to_hn(int slot, int from, int to) const {
  auto rng = make_rng(mix_keys(seed_, kHnHn, slot, static_cast<std::uint64_t>(from) * 4096 + to));
  const Vec3 rel = hn_positions_[to] - hn_positions_[from];
  const double pl = geom::path_loss_db(std::max(0.5, rel.norm()), carrier_,
                                       shadow_db(2, std::min(from, to), std::max(from, to)));
  return geom::synthesize_channel(hn_array_, hn_array_, carrier_, rel, pl, synth_, rng);
}

geom::ChannelMatrix World::hn_to_eve(int slot, int from, int e) const {
  auto rng = make_rng(mix_keys(seed_, kHnEve, slot, static_cast<std::uint64_t>(from) * 4096 + e));
  const Vec3 rel = eve_position(slot, e) - hn_positions_[from];
  const double pl = geom::path_loss_db(std::max(0.5, rel.norm()), carrier_,
                                       shadow_db(3, from, e));
  return geom::synthesize_channel(hn_array_, hn_array_, carrier_, rel, pl, synth_, rng);
}

geom::CsiEstimate World::estimate_bs_to_hn(int slot, int u) const {
  const geom::ChannelMatrix h = bs_to_hn(slot, u);
  auto rng = make_rng(mix_keys(seed_, kCsiBsHn, slot, u));
  const double eps = cfg_->csi_eps_legit_frac * h.entries.squaredNorm();
  auto est = geom::perturb_csi(h, eps, rng);
  return est;
}

double World::world_fingerprint(int slot) const {
  double f = 0.0;
  for (int u = 0; u < num_scheduled(); ++u) f += bs_to_hn(slot, u).entries.squaredNorm();
  for (int e = 0; e < num_eves(); ++e) f += eve_angle_deg(slot, e);
  return f;
}

const MatXc* World::pred_steering(int u) const {
  if (pred_steering_cache_.empty()) pred_steering_cache_.resize(num_hns());
  MatXc& cache = pred_steering_cache_[u];
  if (cache.size() == 0) {
    const int stride = std::max(1, cfg_->pred_bin_stride);
    const int n_bins = cfg_->belief.num_bins;
    const int nsamp = (n_bins + stride - 1) / stride;
    const double range = cfg_->eve_pred_range_factor * hn_range(u);
    const belief::AngularBelief grid = belief::AngularBelief::uniform(n_bins, 1.0);
    cache.resize(bs_array_.num_elements, nsamp);
    for (int s = 0, i = 0; i < n_bins; i += stride, ++s) {
      cache.col(s) =
          geom::steering_vector(bs_array_, polar_point(range, grid.grid_deg[i]), carrier_);
    }
  }
  return &cache;
}

// ---------------------------------------------------------------------------
// Controller state and scalar operations

ControllerState::ControllerState(const scenario::ScenarioConfig& cfg)
    : bel(belief::AngularBelief::uniform(cfg.belief.num_bins, cfg.belief.sigma0_deg)) {
  duals.step_outage = cfg.weights.dual_step_outage;
  duals.step_entropy = cfg.weights.dual_step_entropy;
}

NodeRole follower_best_response(double predicted_secrecy, double secrecy_threshold) {
  return predicted_secrecy < secrecy_threshold ? NodeRole::FriendlyJammer
                                               : NodeRole::LegitimateReceiver;
}

DualState dual_update(const DualState& duals, double mean_secrecy, double entropy_bits,
                      double secrecy_threshold, double entropy_target_bits) {
  DualState next = duals;
  next.lambda_outage =
      std::max(0.0, duals.lambda_outage + duals.step_outage * (secrecy_threshold - mean_secrecy));
  next.lambda_entropy = std::max(
      0.0, duals.lambda_entropy + duals.step_entropy * (entropy_bits - entropy_target_bits));
  return next;
}

double leader_utility(double min_secrecy, double fj_power_w, double entropy_bits,
                      const scenario::GameWeights& weights, double lambda_entropy,
                      double entropy_target_bits) {
  return weights.secrecy * min_secrecy - weights.jam_power * fj_power_w -
         lambda_entropy * std::max(0.0, entropy_bits - entropy_target_bits);
}

double final_utility(const metrics::SlotKpis& kpis, const scenario::GameWeights& weights,
                     const DualState& duals, double complexity_cost, double secrecy_threshold,
                     double entropy_target_bits) {
  return weights.max_secrecy * kpis.max_secrecy + weights.avg_secrecy * kpis.mean_secrecy -
         weights.outage * kpis.outage_prob - weights.entropy * kpis.entropy_bits -
         weights.complexity * complexity_cost -
         duals.lambda_outage * std::max(0.0, secrecy_threshold - kpis.mean_secrecy) -
         duals.lambda_entropy * std::max(0.0, kpis.entropy_bits - entropy_target_bits);
}

// ---------------------------------------------------------------------------
// Secrecy prediction

double predict_secrecy(const NodeState& node, const geom::CsiEstimate& csi,
                       const belief::AngularBelief& bel, const MatXc& precoder_columns,
                       int stream_of_node, const geom::ArrayGeometry& bs,
                       const geom::CarrierSpec& carrier, double noise_w, double eve_range_m,
                       int bin_stride, const MatXc* steering_cache) {
  const int streams = static_cast<int>(precoder_columns.cols());
  const double total_power = precoder_columns.squaredNorm();

  // Legitimate side from estimated CSI.
  double sinr_legit = 0.0;
  VecXc hyp_col;
  if (stream_of_node >= 0) {
    VecXc w = csi.estimate * precoder_columns.col(stream_of_node);
    const double n = w.norm();
    if (n > 0.0) w /= n;
    sinr_legit = bf::sinr_stream(csi.estimate, precoder_columns, stream_of_node, w, 0.0, noise_w);
  } else {
    // Idle node: matched-beam SNR bound at an equal per-stream power share.
    const VecXc a = geom::steering_vector(bs, node.position, carrier);
    hyp_col = a * std::sqrt(total_power / std::max(1, streams));
    sinr_legit = (csi.estimate * hyp_col).squaredNorm() / noise_w;
  }

  // Belief-expected eavesdropper SINR on a thinned bin grid. The hypothetical
  // eavesdropper sits at eve_range_m on each bin azimuth; MRC on the LoS
  // surrogate reduces its SINR to transmit-pattern ratios.
  const double pl = geom::path_loss_db(std::max(1.0, eve_range_m), carrier, 0.0);
  const double plf_sq = std::pow(10.0, -pl / 10.0);

  const int n_bins = bel.size();
  const int stride = std::max(1, bin_stride);
  MatXc local_cache;
  const MatXc* steer = steering_cache;
  if (steer == nullptr || steer->size() == 0) {
    const int nsamp = (n_bins + stride - 1) / stride;
    local_cache.resize(bs.num_elements, nsamp);
    for (int s = 0, i = 0; i < n_bins; i += stride, ++s) {
      local_cache.col(s) =
          geom::steering_vector(bs, polar_point(eve_range_m, bel.grid_deg[i]), carrier);
    }
    steer = &local_cache;
  }

  const MatXc t = steer->adjoint() * precoder_columns; // nsamp x K
  Eigen::VectorXcd t_hyp;
  if (stream_of_node < 0) t_hyp = steer->adjoint() * hyp_col;

  double expect = 0.0, mass = 0.0;
  for (int s = 0, i = 0; i < n_bins; i += stride, ++s) {
    double desired, inter = 0.0;
    for (int k = 0; k < streams; ++k) inter += std::norm(t(s, k));
    if (stream_of_node >= 0) {
      desired = std::norm(t(s, stream_of_node));
      inter -= desired;
    } else {
      desired = std::norm(t_hyp(s));
    }
    const double sinr_e = plf_sq * desired / (plf_sq * inter + noise_w);
    expect += bel.probs[i] * sinr_e;
    mass += bel.probs[i];
  }
  const double eve_sinr = mass > 0.0 ? expect / mass : 0.0;
  return bf::secrecy_rate(std::max(0.0, sinr_legit), eve_sinr);
}

// ---------------------------------------------------------------------------
// Friendly-jamming constraint enforcement

FjEnforcementResult enforce_fj_constraints(
    std::vector<FjJammer> jammers, const PowerBudget& budget, double leak_cap_fraction,
    const std::vector<MatXc>& receiver_est_channels_by_jammer_flat,
    const std::vector<VecXc>& receiver_combiners,
    const std::vector<double>& receiver_desired_power_w, const geom::ArrayGeometry& hn_array,
    const geom::CarrierSpec& carrier, std::string* flags) {
  FjEnforcementResult res;
  if (jammers.empty()) return res;

  // Uniform per-jammer caps with proportional scale-down onto the budget.
  double total = 0.0;
  for (const auto& j : jammers) total += j.power_w;
  if (total > budget.fj_max_w && total > 0.0) {
    const double scale = budget.fj_max_w / total;
    for (auto& j : jammers) {
      j.power_w *= scale;
      j.beam *= std::sqrt(scale);
    }
  }

  const int n_rx = static_cast<int>(receiver_combiners.size());
  const int n_jam = static_cast<int>(jammers.size());

  auto leakage_at = [&](int u) {
    double leak = 0.0;
    for (int j = 0; j < n_jam; ++j) {
      const MatXc& h = receiver_est_channels_by_jammer_flat[u * n_jam + j];
      const cxd v = (receiver_combiners[u].adjoint() * h * jammers[j].beam)(0, 0);
      leak += std::norm(v);
    }
    return leak;
  };
  auto worst_jammer_for = [&](int u) {
    int worst = 0;
    double best = -1.0;
    for (int j = 0; j < n_jam; ++j) {
      const MatXc& h = receiver_est_channels_by_jammer_flat[u * n_jam + j];
      const cxd v = (receiver_combiners[u].adjoint() * h * jammers[j].beam)(0, 0);
      if (std::norm(v) > best) {
        best = std::norm(v);
        worst = j;
      }
    }
    return worst;
  };
  auto find_violation = [&](int* u_out, double* ratio_out) {
    bool found = false;
    double worst_ratio = 1.0;
    for (int u = 0; u < n_rx; ++u) {
      const double cap = leak_cap_fraction * receiver_desired_power_w[u];
      if (cap <= 0.0) continue;
      const double ratio = leakage_at(u) / cap;
      if (ratio > worst_ratio) {
        worst_ratio = ratio;
        *u_out = u;
        found = true;
      }
    }
    *ratio_out = worst_ratio;
    return found;
  };

  if (n_rx > 0 && !receiver_est_channels_by_jammer_flat.empty()) {
    int u = -1;
    double ratio = 1.0;
    // Deepen notches toward the violated receiver, at most 3 rounds: project
    // the offending jammer's weights out of the estimated leak direction
    // (the dominant right singular vector of the leak channel).
    for (int iter = 0; iter < 3 && find_violation(&u, &ratio); ++iter) {
      const int j = worst_jammer_for(u);
      const MatXc& h = receiver_est_channels_by_jammer_flat[u * n_jam + j];
      Eigen::JacobiSVD<MatXc> svd(h, Eigen::ComputeThinV);
      const VecXc dir = svd.matrixV().col(0);
      VecXc w = jammers[j].beam;
      w -= dir * dir.dot(w);
      if (w.norm() > 1e-12) w *= std::sqrt(jammers[j].power_w) / w.norm();
      jammers[j].beam = w;
      ++res.notch_iterations;
    }
    // Still violated: scale the offending jammer's power.
    if (find_violation(&u, &ratio)) {
      const int j = worst_jammer_for(u);
      const double scale = 1.0 / ratio;
      jammers[j].power_w *= scale;
      jammers[j].beam *= std::sqrt(scale);
      if (flags) *flags += "fj_power_scaled;";
    }
    // Last resort: deactivate the worst offender.
    if (find_violation(&u, &ratio)) {
      const int j = worst_jammer_for(u);
      res.deactivated_id = jammers[j].id;
      res.infeasible = true;
      if (flags) *flags += "fj_deactivated;";
      jammers.erase(jammers.begin() + j);
    }
  }

  res.total_power_w = 0.0;
  for (const auto& j : jammers) res.total_power_w += j.power_w;
  res.jammers = std::move(jammers);
  return res;
}

// ---------------------------------------------------------------------------
// Intra-slot adaptive sensing & beamforming

AdaptiveResult run_adaptive(const belief::AngularBelief& prior,
                            const scenario::ScenarioConfig& cfg,
                            const std::vector<bf::NotchSpec>& protected_angles,
                            const std::vector<double>& true_eve_angles_deg,
                            const geom::ArrayGeometry& bs, const geom::CarrierSpec& carrier,
                            double sensing_range_m, std::mt19937_64& rng,
                            bool force_fire) {
  const belief::BeliefHyperparams params = cfg.belief.to_hyperparams();
  belief::SensingModel model;
  model.snr_sens = db_to_linear(cfg.sensing.snr_sens_db);
  model.sigma_meas_deg = cfg.sensing.sigma_meas_deg;
  model.sigma_look_deg = cfg.sensing.sigma_look_deg;
  model.miss_depth = cfg.sensing.miss_depth;
  model.noise_level = cfg.sensing.noise_level;

  std::vector<std::pair<double, double>> excluded;
  for (const auto& n : protected_angles)
    excluded.emplace_back(n.angle_deg - 2.0, n.angle_deg + 2.0);

  AdaptiveResult res;
  belief::AngularBelief current = belief::predict(prior, params.uniform_mix);
  double conf = belief::confidence(current);
  res.conf_entry = conf;

  // Early stop gates at entry: a confident posterior skips the slot's sensing
  // entirely. Once firing, the full pass schedule runs, later passes steering
  // away from the angles already looked at this slot so that every tracked
  // mode gets refreshed (a mid-schedule stop would starve the weaker modes).
  if (conf < params.conf_threshold || force_fire) {
    std::vector<std::pair<double, double>> looked = excluded;
    while (res.passes < cfg.sensing.max_passes) {
      // Peak extraction with a separation floor: with a sharpened kernel the
      // raw separation would pick adjacent bins of one mode and waste looks.
      belief::AngularBelief peaks_view = current;
      peaks_view.kernel_width_deg =
          std::max(current.kernel_width_deg, model.sigma_look_deg);
      const belief::MapPeaksResult peaks = belief::map_peaks(peaks_view, 2, looked);
      if (peaks.bins.empty()) {
        res.uninformative = true;
        break;
      }
      const double taper = std::clamp(conf, 0.0, 1.0);
      std::vector<std::vector<double>> profiles;
      profiles.reserve(peaks.angles_deg.size());
      for (double ang : peaks.angles_deg) {
        const VecXc w =
            bf::sensing_beam(taper, polar_point(sensing_range_m, ang), bs, carrier);
        std::vector<double> prof(current.size());
        double peak_gain = 0.0;
        for (int i = 0; i < current.size(); ++i) {
          prof[i] = bf::pattern_gain(w, current.grid_deg[i], bs, carrier);
          peak_gain = std::max(peak_gain, prof[i]);
        }
        if (peak_gain > 0.0)
          for (double& p : prof) p /= peak_gain;
        profiles.push_back(std::move(prof));
      }
      const std::vector<double> z = belief::sensing_response(
          current, peaks.angles_deg, true_eve_angles_deg, profiles, model, rng);
      const double k_eff = belief::likelihood_exponent(conf, params);
      belief::UpdateResult upd = belief::update(current, z, k_eff);
      if (upd.uninformative) res.uninformative = true;
      current = upd.posterior;
      belief::apply_mass_ceiling(current, params.mass_ceiling);
      res.beams_fired += static_cast<int>(peaks.angles_deg.size());
      res.passes += 1;
      const double guard = std::max(model.sigma_look_deg, current.kernel_width_deg);
      for (double ang : peaks.angles_deg) looked.emplace_back(ang - guard, ang + guard);
      conf = belief::confidence(current);
    }
  }

  const double h = belief::entropy(current);
  res.gamma_t = belief::sensing_fraction(h, current.size(), params);
  // Entropy-conditioned meta-kernel update, with a lock detector: a tracker
  // whose mode already holds half the mass must stop widening even while
  // diffusion tails keep the raw entropy above target.
  const bool calm = h <= params.entropy_target_bits ||
                    belief::map_mass(current, 2.0 * cfg.sensing.sigma_meas_deg) >= 0.5;
  res.sigma_next_deg = belief::adapt_kernel(current.kernel_width_deg, calm, params);
  current.kernel_width_deg = res.sigma_next_deg;

  // Exposed beams: tapered focus on the MAP peak; comm beam posterior-aligned
  // with the protected-angle notches.
  const int map_bin = current.map_bin();
  const double map_angle = current.grid_deg[map_bin];
  res.sensing_weights = bf::sensing_beam(std::clamp(conf, 0.0, 1.0),
                                         polar_point(sensing_range_m, map_angle), bs, carrier);
  VecXc comm = geom::steering_vector(bs, polar_point(sensing_range_m, map_angle), carrier);
  if (!protected_angles.empty() &&
      protected_angles.size() < static_cast<std::size_t>(bs.num_elements)) {
    comm = bf::apply_notches(comm, protected_angles, bs, carrier).weights;
  }
  res.comm_weights = comm;
  res.posterior = std::move(current);
  return res;
}

// ---------------------------------------------------------------------------
// Per-slot controllers

namespace {

struct RealizedSlot {
  std::vector<double> per_hn_secrecy;
  double fj_power_w = 0.0;
  int active_jammers = 0;
};

// Realized SINR/secrecy with true channels for the active receivers.
RealizedSlot evaluate_realized(const World& world, int slot, const bf::PrecoderSet& prec,
                               const std::vector<int>& receiver_ids,
                               const std::vector<FjJammer>& jammers, bool include_phantom,
                               double map_angle_deg) {
  const auto& cfg = world.cfg();
  const int k = static_cast<int>(receiver_ids.size());
  const double noise_w = cfg.noise_power_w();
  RealizedSlot out;
  out.active_jammers = static_cast<int>(jammers.size());
  for (const auto& j : jammers) out.fj_power_w += j.power_w;

  // True jam channels toward each receiver.
  std::vector<std::vector<MatXc>> jam_to_rx(k);
  for (int u = 0; u < k; ++u) {
    jam_to_rx[u].reserve(jammers.size());
    for (const auto& j : jammers)
      jam_to_rx[u].push_back(world.hn_to_hn(slot, j.id, receiver_ids[u]).entries);
  }

  // Eavesdropper set: every modeled eavesdropper plus, when enabled, a
  // phantom at the MAP belief angle.
  struct EveView {
    MatXc channel;
    std::vector<MatXc> jam_channels;
  };
  std::vector<EveView> eves;
  for (int e = 0; e < world.num_eves(); ++e) {
    EveView v;
    v.channel = world.bs_to_eve(slot, e).entries;
    for (const auto& j : jammers) v.jam_channels.push_back(world.hn_to_eve(slot, j.id, e).entries);
    eves.push_back(std::move(v));
  }
  if (include_phantom) {
    const double range = cfg.eve_pred_range_factor * world.mean_scheduled_range();
    const Vec3 pos = polar_point(range, map_angle_deg);
    EveView v;
    v.channel = world.bs_to_phantom(slot, pos).entries;
    for (const auto& j : jammers) {
      auto rng = make_rng(mix_keys(world.seed(), kHnPhantom, slot, j.id));
      const Vec3 rel = pos - world.hn_position(j.id);
      const double pl = geom::path_loss_db(std::max(0.5, rel.norm()), world.carrier(), 0.0);
      v.jam_channels.push_back(geom::synthesize_channel(world.hn_array(), world.hn_array(),
                                                        world.carrier(), rel, pl,
                                                        geom::SynthesisOptions{}, rng)
                                   .entries);
    }
    eves.push_back(std::move(v));
  }

  std::vector<VecXc> jam_vectors;
  for (const auto& j : jammers) jam_vectors.push_back(j.beam);

  out.per_hn_secrecy.resize(k);
  for (int u = 0; u < k; ++u) {
    const MatXc h_true = world.bs_to_hn(slot, receiver_ids[u]).entries;
    const VecXc& w_u = prec.hn_combiners[u];
    const double i_u = bf::received_jamming_power(jam_to_rx[u], jam_vectors, w_u);
    const double sinr_u = bf::sinr_stream(h_true, prec.combined, u, w_u, i_u, noise_w);

    double worst_eve = 0.0;
    for (const auto& eve : eves) {
      VecXc w_e = eve.channel * prec.combined.col(u);
      const double n = w_e.norm();
      if (n > 0.0) w_e /= n;
      else w_e = VecXc::Ones(eve.channel.rows());
      const double i_e = bf::received_jamming_power(eve.jam_channels, jam_vectors, w_e);
      worst_eve = std::max(worst_eve,
                           bf::sinr_stream(eve.channel, prec.combined, u, w_e, i_e, noise_w));
    }
    out.per_hn_secrecy[u] = bf::secrecy_rate(sinr_u, worst_eve);
  }
  return out;
}

metrics::SlotKpis finalize_kpis(const World& world, const RealizedSlot& realized,
                                double entropy_bits, double comm_power_w,
                                double sensing_power_w, double complexity,
                                DualState& duals_io, std::string flags) {
  const auto& cfg = world.cfg();
  metrics::SlotKpis k;
  k.per_hn_secrecy = realized.per_hn_secrecy;
  const metrics::OutageResult out = metrics::outage(k.per_hn_secrecy, cfg.secrecy_threshold);
  k.outage_prob = out.fraction;
  k.success_rate = 100.0 * (1.0 - out.fraction);
  double sum = 0.0, mx = 0.0, mn = 1e300;
  for (double r : k.per_hn_secrecy) {
    sum += r;
    mx = std::max(mx, r);
    mn = std::min(mn, r);
  }
  k.mean_secrecy = k.per_hn_secrecy.empty() ? 0.0 : sum / k.per_hn_secrecy.size();
  k.max_secrecy = mx;
  k.entropy_bits = entropy_bits;
  k.active_jammers = realized.active_jammers;
  k.complexity = complexity;

  const metrics::PowerBreakdown pb = metrics::power_account(
      comm_power_w, sensing_power_w, realized.fj_power_w, cfg.pa_efficiency);
  k.comm_power_w = pb.comm_w;
  k.sensing_power_w = pb.sensing_w;
  k.fj_power_w = pb.fj_w;
  k.total_power_w = pb.total_w;

  const double h_star =
      cfg.belief.entropy_target_frac * std::log2(static_cast<double>(cfg.belief.num_bins));
  duals_io = dual_update(duals_io, k.mean_secrecy, entropy_bits, cfg.secrecy_threshold, h_star);
  k.leader_utility = leader_utility(mn == 1e300 ? 0.0 : mn, realized.fj_power_w, entropy_bits,
                                    cfg.weights, duals_io.lambda_entropy, h_star);
  k.final_utility =
      final_utility(k, cfg.weights, duals_io, complexity, cfg.secrecy_threshold, h_star);
  k.flags = std::move(flags);
  return k;
}

} // namespace

metrics::SlotKpis baseline_controller(const World& world, int slot) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& cfg = world.cfg();
  const int k = world.num_scheduled();

  std::vector<geom::CsiEstimate> ests;
  std::vector<Vec3> focals;
  ests.reserve(k);
  for (int u = 0; u < k; ++u) {
    ests.push_back(world.estimate_bs_to_hn(slot, u));
    focals.push_back(world.hn_position(u));
  }
  const bf::PrecoderSet prec =
      bf::build_hybrid_precoder(ests, focals, world.bs_array(), world.carrier(),
                                cfg.rf_chains, cfg.tx_power_cap_w, 0.0, /*mrt_digital=*/true);

  std::vector<int> receiver_ids(k);
  for (int u = 0; u < k; ++u) receiver_ids[u] = u;
  const RealizedSlot realized =
      evaluate_realized(world, slot, prec, receiver_ids, {}, /*include_phantom=*/false, 0.0);

  const double entropy_bits = std::log2(static_cast<double>(cfg.belief.num_bins));
  DualState duals; // static comparator carries no dual dynamics
  duals.step_outage = 0.0;
  duals.step_entropy = 0.0;
  metrics::SlotKpis kpis = finalize_kpis(world, realized, entropy_bits, cfg.tx_power_cap_w,
                                         0.0, 0.0, duals, "");
  kpis.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return kpis;
}

metrics::SlotKpis run_slot(const World& world, Controller mode, int slot,
                           ControllerState& state) {
  if (mode == Controller::Baseline) return baseline_controller(world, slot);

  const auto t0 = std::chrono::steady_clock::now();
  const auto& cfg = world.cfg();
  const int k = world.num_scheduled();
  const int num_hns = world.num_hns();
  const double noise_w = cfg.noise_power_w();
  const belief::BeliefHyperparams params = cfg.belief.to_hyperparams();
  const double h_star = params.entropy_target_bits;
  std::string flags;

  auto rng_ctrl = make_rng(
      mix_keys(world.seed(), kController, slot, static_cast<std::uint64_t>(mode)));

  std::vector<double> true_eve_angles;
  for (int e = 0; e < world.num_eves(); ++e)
    true_eve_angles.push_back(world.eve_angle_deg(slot, e));

  const double sensing_range_m = cfg.eve_pred_range_factor * world.mean_scheduled_range();

  // --- Belief pipeline (Algorithm 2 refinement, plain pass, or coast) ------
  belief::AngularBelief posterior = state.bel;
  double gamma_t = params.gamma_min;
  int passes = 0, beams_fired = 0;
  double sigma_next = state.bel.kernel_width_deg;
  bool sigma_from_secrecy = true;

  if (mode == Controller::Alg2) {
    // Periodic patrol: with several tracked threats, a confident posterior
    // must still revisit the field of view or undiscovered targets stay
    // invisible forever.
    const bool patrol_due = cfg.sensing.patrol_period > 0 &&
                            state.slots_since_sensing >= cfg.sensing.patrol_period;
    AdaptiveResult ar = run_adaptive(state.bel, cfg, state.protected_prev, true_eve_angles,
                                     world.bs_array(), world.carrier(), sensing_range_m,
                                     rng_ctrl, patrol_due);
    state.slots_since_sensing = ar.passes > 0 ? 0 : state.slots_since_sensing + 1;
    posterior = std::move(ar.posterior);
    gamma_t = ar.gamma_t;
    passes = ar.passes;
    beams_fired = ar.beams_fired;
    sigma_next = ar.sigma_next_deg;
    sigma_from_secrecy = false;
    if (ar.uninformative) flags += "uninformative_likelihood;";
  } else if (mode == Controller::Alg1) {
    belief::AngularBelief pred = belief::predict(state.bel, params.uniform_mix);
    std::vector<std::pair<double, double>> excluded;
    for (const auto& n : state.protected_prev)
      excluded.emplace_back(n.angle_deg - 2.0, n.angle_deg + 2.0);
    belief::AngularBelief pred_view = pred;
    pred_view.kernel_width_deg =
        std::max(pred.kernel_width_deg, cfg.sensing.sigma_look_deg);
    const belief::MapPeaksResult peaks = belief::map_peaks(pred_view, 2, excluded);
    if (!peaks.bins.empty()) {
      belief::SensingModel model;
      model.snr_sens = db_to_linear(cfg.sensing.snr_sens_db);
      model.sigma_meas_deg = cfg.sensing.sigma_meas_deg;
      model.sigma_look_deg = cfg.sensing.sigma_look_deg;
      model.miss_depth = cfg.sensing.miss_depth;
      model.noise_level = cfg.sensing.noise_level;
      std::vector<std::vector<double>> profiles;
      for (double ang : peaks.angles_deg) {
        const VecXc w = bf::sensing_beam(cfg.alg1_taper, polar_point(sensing_range_m, ang),
                                         world.bs_array(), world.carrier());
        std::vector<double> prof(pred.size());
        double pk = 0.0;
        for (int i = 0; i < pred.size(); ++i) {
          prof[i] = bf::pattern_gain(w, pred.grid_deg[i], world.bs_array(), world.carrier());
          pk = std::max(pk, prof[i]);
        }
        if (pk > 0.0)
          for (double& p : prof) p /= pk;
        profiles.push_back(std::move(prof));
      }
      const std::vector<double> z = belief::sensing_response(
          pred, peaks.angles_deg, true_eve_angles, profiles, model, rng_ctrl);
      belief::UpdateResult upd = belief::update(pred, z, params.k_min);
      if (upd.uninformative) flags += "uninformative_likelihood;";
      posterior = upd.posterior;
      belief::apply_mass_ceiling(posterior, params.mass_ceiling);
      beams_fired = static_cast<int>(peaks.angles_deg.size());
    } else {
      posterior = pred;
    }
    passes = 1;
    gamma_t = belief::sensing_fraction(belief::entropy(posterior), posterior.size(), params);
  } else { // Alg1NoSensing: the radar radiates its full scan schedule, but
           // the echoes never reach the belief (no sensing integration).
    posterior = belief::predict(state.bel, params.uniform_mix);
    passes = cfg.sensing.max_passes;
    beams_fired = 2 * cfg.sensing.max_passes;
    gamma_t = belief::sensing_fraction(belief::entropy(posterior), posterior.size(), params);
  }

  const double entropy_bits = belief::entropy(posterior);
  const double runtime_depth = mode == Controller::Alg2 ? cfg.runtime_notch_depth_alg2_db
                                                        : cfg.runtime_notch_depth_alg1_db;

  // --- Power split (sensing bite comes out of the BS budget) ---------------
  const double duty = cfg.sensing.max_passes > 0
                          ? static_cast<double>(passes) / cfg.sensing.max_passes
                          : 0.0;
  const double sensing_power = gamma_t * cfg.tx_power_cap_w * duty;
  const double comm_power =
      std::max(0.0, std::min(cfg.power_alpha * cfg.tx_power_cap_w,
                             cfg.tx_power_cap_w - sensing_power));
  const double rzf_delta = k * noise_w / std::max(1e-9, comm_power);

  // --- Provisional precoder on the nominal schedule --------------------------
  std::vector<geom::CsiEstimate> ests_all(num_hns);
  for (int u = 0; u < num_hns; ++u) ests_all[u] = world.estimate_bs_to_hn(slot, u);
  auto build_for = [&](const std::vector<int>& ids) {
    std::vector<geom::CsiEstimate> ests;
    std::vector<Vec3> focals;
    for (int id : ids) {
      ests.push_back(ests_all[id]);
      focals.push_back(world.hn_position(id));
    }
    return bf::build_hybrid_precoder(ests, focals, world.bs_array(), world.carrier(),
                                     cfg.rf_chains, comm_power, rzf_delta);
  };
  std::vector<int> nominal(k);
  for (int u = 0; u < k; ++u) nominal[u] = u;
  bf::PrecoderSet prec = build_for(nominal);
  if (prec.digital_fallback) flags += "digital_fallback;";

  // --- Follower best responses ----------------------------------------------
  std::vector<NodeState> nodes(num_hns);
  std::vector<int> jammer_ids;
  for (int u = 0; u < num_hns; ++u) {
    nodes[u].id = u;
    nodes[u].position = world.hn_position(u);
    nodes[u].max_power_w = cfg.hn_max_power_w;
    const double eve_range = cfg.eve_pred_range_factor * world.hn_range(u);
    nodes[u].predicted_secrecy =
        predict_secrecy(nodes[u], ests_all[u], posterior, prec.combined, u < k ? u : -1,
                        world.bs_array(), world.carrier(), noise_w, eve_range,
                        cfg.pred_bin_stride, world.pred_steering(u));
    nodes[u].role = follower_best_response(nodes[u].predicted_secrecy, cfg.secrecy_threshold);
    if (nodes[u].role == NodeRole::FriendlyJammer) jammer_ids.push_back(u);
  }

  // --- Stream reallocation ----------------------------------------------------
  // Switched nodes stop receiving (serving them would feed the eavesdropper);
  // their streams move to the best predicted-safe idle nodes. When no safe
  // replacement exists the original node keeps its stream, flagged.
  std::vector<int> receiver_ids;
  std::vector<int> vacancies;
  for (int u = 0; u < k; ++u) {
    if (nodes[u].role == NodeRole::LegitimateReceiver) receiver_ids.push_back(u);
    else vacancies.push_back(u);
  }
  if (!vacancies.empty()) {
    std::vector<std::pair<double, int>> pool;
    for (int u = k; u < num_hns; ++u) {
      if (nodes[u].role == NodeRole::LegitimateReceiver)
        pool.emplace_back(nodes[u].predicted_secrecy, u);
    }
    std::sort(pool.begin(), pool.end(), std::greater<>());
    std::size_t next = 0;
    for (int vacancy : vacancies) {
      if (next < pool.size()) {
        receiver_ids.push_back(pool[next++].second);
      } else {
        receiver_ids.push_back(vacancy); // keep serving, no safe replacement
        flags += "unfillable_vacancy;";
      }
    }
    std::sort(receiver_ids.begin(), receiver_ids.end());
    prec = build_for(receiver_ids);
    if (prec.digital_fallback) flags += "digital_fallback;";
  }

  // --- Leader policy ----------------------------------------------------------
  LeaderPolicy policy;
  policy.sensing_weight = gamma_t;
  policy.leak_cap = cfg.leak_cap_fraction;
  for (int id : receiver_ids)
    policy.protected_angles.push_back({world.hn_azimuth_deg(id), runtime_depth});

  // --- Friendly jamming: aim at MAP peaks, protect receivers ----------------
  PowerBudget budget;
  budget.alpha = cfg.power_alpha;
  budget.beta = cfg.power_beta;
  budget.gamma = cfg.power_gamma;
  budget.tx_cap_w = cfg.tx_power_cap_w;
  budget.fj_max_w = cfg.fj_max_w();
  budget.pa_efficiency = cfg.pa_efficiency;

  std::vector<int> active_jammer_ids;
  for (int id : jammer_ids) {
    if (std::find(receiver_ids.begin(), receiver_ids.end(), id) == receiver_ids.end())
      active_jammer_ids.push_back(id);
  }

  std::vector<FjJammer> jammers;
  if (!active_jammer_ids.empty()) {
    std::vector<std::pair<double, double>> excluded;
    for (const auto& n : policy.protected_angles)
      excluded.emplace_back(n.angle_deg - 1.0, n.angle_deg + 1.0);
    belief::AngularBelief post_view = posterior;
    post_view.kernel_width_deg =
        std::max(posterior.kernel_width_deg, cfg.sensing.sigma_look_deg);
    const belief::MapPeaksResult peaks =
        belief::map_peaks(post_view, cfg.jam_max_targets, excluded);

    const double believed_range = cfg.eve_pred_range_factor * world.mean_scheduled_range();
    for (int id : active_jammer_ids) {
      FjJammer j;
      j.id = id;
      j.power_w = cfg.hn_max_power_w;
      // Protect every active receiver, expressed in the jammer's frame
      // (folded onto the front hemisphere of its linear array).
      for (int rid : receiver_ids) {
        const Vec3 rel = world.hn_position(rid) - world.hn_position(id);
        j.protected_angles.push_back({fold_to_front_deg(azimuth_deg_of(rel)), runtime_depth});
      }
      // Nearest two believed targets, weighted by mass and proximity.
      std::vector<std::pair<double, int>> scored;
      for (std::size_t p = 0; p < peaks.bins.size(); ++p) {
        const double diff =
            std::abs(wrap_angle_deg(peaks.angles_deg[p] - world.hn_azimuth_deg(id)));
        scored.emplace_back(posterior.probs[peaks.bins[p]] / (1.0 + diff / 10.0), p);
      }
      std::sort(scored.begin(), scored.end(), std::greater<>());
      for (std::size_t s = 0; s < std::min<std::size_t>(2, scored.size()); ++s) {
        const int p = scored[s].second;
        bf::JamTarget t;
        t.focal_point =
            polar_point(believed_range, peaks.angles_deg[p]) - world.hn_position(id);
        t.weight = scored[s].first;
        j.targets.push_back(t);
      }
      bf::JamBeamResult beam = bf::jam_beam_from_targets(
          j.targets, j.protected_angles, world.hn_array(), world.carrier(), j.power_w);
      if (beam.degenerate) flags += "jam_degenerate;";
      j.beam = beam.weights;
      jammers.push_back(std::move(j));
    }

    // Estimated leak channels and desired powers for the enforcement loop.
    const int n_rx = static_cast<int>(receiver_ids.size());
    std::vector<MatXc> est_leaks(static_cast<std::size_t>(n_rx) * jammers.size());
    for (int u = 0; u < n_rx; ++u) {
      for (std::size_t j = 0; j < jammers.size(); ++j) {
        const geom::ChannelMatrix h = world.hn_to_hn(slot, jammers[j].id, receiver_ids[u]);
        auto rng = make_rng(
            mix_keys(world.seed(), kCsiHnHn, slot,
                     static_cast<std::uint64_t>(jammers[j].id) * 4096 + receiver_ids[u]));
        est_leaks[u * jammers.size() + j] =
            geom::perturb_csi(h, cfg.csi_eps_legit_frac * h.entries.squaredNorm(), rng)
                .estimate;
      }
    }
    std::vector<double> desired(n_rx);
    for (int u = 0; u < n_rx; ++u) {
      const cxd v = (prec.hn_combiners[u].adjoint() * ests_all[receiver_ids[u]].estimate *
                     prec.combined.col(u))(0, 0);
      desired[u] = std::norm(v);
    }
    FjEnforcementResult fj =
        enforce_fj_constraints(std::move(jammers), budget, policy.leak_cap, est_leaks,
                               prec.hn_combiners, desired, world.hn_array(), world.carrier(),
                               &flags);
    jammers = std::move(fj.jammers);
  }

  // --- Realized KPIs with true channels --------------------------------------
  const double map_angle = posterior.grid_deg[posterior.map_bin()];
  const RealizedSlot realized = evaluate_realized(world, slot, prec, receiver_ids, jammers,
                                                  cfg.include_map_phantom_eve, map_angle);

  const int max_beams = 2 * cfg.sensing.max_passes;
  const double complexity =
      (beams_fired + passes) / static_cast<double>(std::max(1, max_beams + cfg.sensing.max_passes));

  metrics::SlotKpis kpis = finalize_kpis(world, realized, entropy_bits, comm_power,
                                         sensing_power, complexity, state.duals, flags);

  // --- Meta-adaptation -------------------------------------------------------
  if (sigma_from_secrecy) {
    sigma_next = belief::adapt_kernel(state.bel.kernel_width_deg,
                                      kpis.mean_secrecy >= cfg.secrecy_threshold, params);
  }
  posterior.kernel_width_deg = sigma_next;
  state.bel = std::move(posterior);
  state.protected_prev = policy.protected_angles;

  kpis.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return kpis;
}

} // namespace nfisac::game
