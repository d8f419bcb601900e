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

#include "nfisac/beamforming.hpp"

#include <algorithm>
#include <stdexcept>

namespace nfisac::bf {

PrecoderSet build_hybrid_precoder(const std::vector<geom::CsiEstimate>& channel_estimates,
                                  const std::vector<Vec3>& user_focal_points,
                                  const geom::ArrayGeometry& tx,
                                  const geom::CarrierSpec& carrier, int rf_chains,
                                  double power_cap_w, double rzf_regularization,
                                  bool mrt_digital) {
  const int streams = static_cast<int>(channel_estimates.size());
  if (streams == 0) throw std::invalid_argument("build_hybrid_precoder: no streams");
  if (streams > rf_chains)
    throw std::invalid_argument("build_hybrid_precoder: more streams than RF chains");
  if (static_cast<int>(user_focal_points.size()) != streams)
    throw std::invalid_argument("build_hybrid_precoder: focal point per stream required");
  const int num_tx = tx.num_elements;
  if (num_tx % rf_chains != 0)
    throw std::invalid_argument("build_hybrid_precoder: array not divisible into subarrays");
  const int sub = num_tx / rf_chains;

  PrecoderSet set;
  // Analog stage: RF chain c serves user (c mod K); its subarray entries
  // conjugate that user's propagation phases (the steering phases e^{-jk r}),
  // so the radiated wavefront adds coherently at the user's focal point.
  set.analog = MatXc::Zero(num_tx, rf_chains);
  for (int c = 0; c < rf_chains; ++c) {
    const int u = c % streams;
    const VecXc a = steering_vector(tx, user_focal_points[u], carrier);
    for (int r = 0; r < sub; ++r) {
      const int row = c * sub + r;
      set.analog(row, c) = a(row) / std::abs(a(row)); // unit modulus
    }
  }

  // Effective channel rows: matched rx combining on the dominant path, then
  // through the analog stage.
  MatXc eff(streams, rf_chains);
  for (int u = 0; u < streams; ++u) {
    const MatXc& h = channel_estimates[u].estimate;
    const VecXc a_tx = steering_vector(tx, user_focal_points[u], carrier);
    VecXc w = h * a_tx;
    const double n = w.norm();
    if (n > 0.0) w /= n;
    else w = VecXc::Ones(h.rows()) / std::sqrt(static_cast<double>(h.rows()));
    eff.row(u) = (w.adjoint() * h * set.analog);
  }

  // Digital stage: regularized zero-forcing; matched filter on breakdown or
  // when the caller asks for plain max-ratio transmission.
  MatXc digital;
  if (mrt_digital) {
    digital = eff.adjoint();
  } else {
    MatXc gram = eff * eff.adjoint();
    gram.diagonal().array() += rzf_regularization;
    Eigen::FullPivLU<MatXc> lu(gram);
    if (lu.isInvertible()) {
      digital = eff.adjoint() * lu.inverse();
    } else {
      digital = eff.adjoint();
      set.digital_fallback = true;
    }
  }

  set.combined = set.analog * digital;
  // Equal per-stream split of the cap.
  const double per_stream = power_cap_w / streams;
  for (int u = 0; u < streams; ++u) {
    const double n = set.combined.col(u).norm();
    if (n > 0.0) {
      const double scale = std::sqrt(per_stream) / n;
      set.combined.col(u) *= scale;
      digital.col(u) *= scale;
    }
  }
  set.digital = digital;

  // Maximum-ratio combiners on the effective desired channels.
  set.hn_combiners.resize(streams);
  for (int u = 0; u < streams; ++u) {
    VecXc w = channel_estimates[u].estimate * set.combined.col(u);
    const double n = w.norm();
    if (n > 0.0) w /= n;
    else w = VecXc::Ones(channel_estimates[u].estimate.rows());
    set.hn_combiners[u] = w;
  }
  return set;
}

VecXc sensing_beam(double taper, const Vec3& focal_point, const geom::ArrayGeometry& geometry,
                   const geom::CarrierSpec& carrier) {
  if (taper < 0.0 || taper > 1.0) throw std::domain_error("sensing_beam: taper outside [0,1]");
  const int n = geometry.num_elements;
  const VecXc a = steering_vector(geometry, focal_point, carrier);
  VecXc w(n);
  for (int i = 0; i < n; ++i) {
    const double hamming =
        n == 1 ? 1.0 : 0.54 - 0.46 * std::cos(2.0 * constants::pi * i / (n - 1));
    w(i) = ((1.0 - taper) + taper * hamming) * a(i);
  }
  const double norm = w.norm();
  if (norm > 0.0) w /= norm;
  return w;
}

namespace {

// Orthogonal projection of w onto the complement of span(constraints).
VecXc project_out(const VecXc& w, const MatXc& constraints) {
  const MatXc gram = constraints.adjoint() * constraints;
  const VecXc rhs = constraints.adjoint() * w;
  const VecXc coef = gram.ldlt().solve(rhs);
  return w - constraints * coef;
}

double mainlobe_peak_gain(const VecXc& w, const geom::ArrayGeometry& g,
                          const geom::CarrierSpec& c) {
  double peak = 0.0;
  for (double az = -90.0; az <= 90.0; az += 0.25)
    peak = std::max(peak, pattern_gain(w, az, g, c));
  return peak;
}

} // namespace

NotchResult apply_notches(const VecXc& weights, const std::vector<NotchSpec>& notches,
                          const geom::ArrayGeometry& geometry, const geom::CarrierSpec& carrier,
                          const std::vector<Vec3>& extra_null_points) {
  NotchResult res;
  if (notches.empty() && extra_null_points.empty()) {
    res.weights = weights;
    return res;
  }
  const std::size_t n_constraints = notches.size() + extra_null_points.size();
  if (n_constraints >= static_cast<std::size_t>(geometry.num_elements))
    throw std::invalid_argument("apply_notches: more notches than array degrees of freedom");
  for (const auto& sp : notches) {
    if (sp.angle_deg < -90.0 || sp.angle_deg > 90.0)
      throw std::invalid_argument("apply_notches: notch angle outside the angular grid span");
    if (sp.depth_db < 0.0) throw std::invalid_argument("apply_notches: negative notch depth");
  }

  MatXc constraints(geometry.num_elements, n_constraints);
  for (std::size_t i = 0; i < notches.size(); ++i)
    constraints.col(i) = far_field_steering(geometry, notches[i].angle_deg, carrier);
  for (std::size_t i = 0; i < extra_null_points.size(); ++i)
    constraints.col(notches.size() + i) =
        steering_vector(geometry, extra_null_points[i], carrier);

  VecXc w = project_out(weights, constraints);
  const double orig = weights.norm();
  const double now = w.norm();
  if (now > 1e-12) w *= orig / now;

  res.weights = w;
  const double peak = mainlobe_peak_gain(w, geometry, carrier);
  res.achieved_suppression_db.reserve(notches.size());
  for (const auto& sp : notches) {
    const double g = pattern_gain(w, sp.angle_deg, geometry, carrier);
    const double sup = g > 0.0 ? 10.0 * std::log10(peak / g) : 300.0;
    res.achieved_suppression_db.push_back(sup);
  }
  return res;
}

double pattern_gain(const VecXc& weights, double azimuth_deg,
                    const geom::ArrayGeometry& geometry, const geom::CarrierSpec& carrier) {
  const VecXc a = far_field_steering(geometry, azimuth_deg, carrier);
  return std::norm(a.dot(weights)); // a^H w
}

std::vector<double> pattern_scan(const VecXc& weights, const geom::ArrayGeometry& geometry,
                                 const geom::CarrierSpec& carrier, double start_deg,
                                 double stop_deg, double step_deg) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>((stop_deg - start_deg) / step_deg) + 1);
  for (double az = start_deg; az <= stop_deg + 1e-12; az += step_deg)
    out.push_back(pattern_gain(weights, az, geometry, carrier));
  return out;
}

JamBeamResult jam_beam_from_targets(const std::vector<JamTarget>& targets,
                                    const std::vector<NotchSpec>& protected_angles,
                                    const geom::ArrayGeometry& geometry,
                                    const geom::CarrierSpec& carrier, double power_w) {
  JamBeamResult res;
  VecXc w = VecXc::Zero(geometry.num_elements);
  double total = 0.0;
  for (const auto& t : targets) total += t.weight;
  if (total > 0.0) {
    for (const auto& t : targets)
      w += (t.weight / total) * steering_vector(geometry, t.focal_point, carrier);
  }
  if (w.norm() < 1e-9) {
    // Nothing left to aim at: fall back to a wide angular fan minus the
    // protected directions.
    w = VecXc::Zero(geometry.num_elements);
    for (double az = -75.0; az <= 75.0; az += 15.0)
      w += far_field_steering(geometry, az, carrier);
    res.degenerate = true;
  }
  if (!protected_angles.empty()) {
    NotchResult nr = apply_notches(w, protected_angles, geometry, carrier);
    w = nr.weights;
  }
  const double n = w.norm();
  if (n > 0.0) w *= std::sqrt(power_w) / n;
  res.weights = w;
  return res;
}

JamBeamResult jamming_beam(const belief::AngularBelief& bel,
                           const std::vector<NotchSpec>& protected_angles,
                           const geom::ArrayGeometry& geometry,
                           const geom::CarrierSpec& carrier, double power_w,
                           double target_range_m) {
  std::vector<std::pair<double, double>> excluded;
  excluded.reserve(protected_angles.size());
  const double guard = std::max(bel.bin_width_deg(), 1.0);
  for (const auto& p : protected_angles)
    excluded.emplace_back(p.angle_deg - guard, p.angle_deg + guard);

  const belief::MapPeaksResult peaks = belief::map_peaks(bel, 2, excluded);
  std::vector<JamTarget> targets;
  targets.reserve(peaks.bins.size());
  for (std::size_t i = 0; i < peaks.bins.size(); ++i) {
    JamTarget t;
    t.focal_point = polar_point(target_range_m, peaks.angles_deg[i]);
    t.weight = bel.probs[peaks.bins[i]];
    targets.push_back(t);
  }
  return jam_beam_from_targets(targets, protected_angles, geometry, carrier, power_w);
}

double sinr_stream(const MatXc& channel, const MatXc& precoder_columns, int stream,
                   const VecXc& combiner, double external_interference_w, double noise_w,
                   double tx_scale) {
  if (noise_w <= 0.0) throw std::domain_error("sinr_stream: noise power must be positive");
  if (stream < 0 || stream >= precoder_columns.cols())
    throw std::out_of_range("sinr_stream: stream index");
  const Eigen::RowVectorXcd rx = combiner.adjoint() * channel * precoder_columns; // W^H H f_k
  double desired = 0.0, inter = 0.0;
  for (Eigen::Index k = 0; k < rx.size(); ++k) {
    const double p = tx_scale * std::norm(rx(k));
    if (k == stream) desired = p;
    else inter += p;
  }
  return desired / (inter + external_interference_w + noise_w);
}

double received_jamming_power(const std::vector<MatXc>& jammer_channels,
                              const std::vector<VecXc>& jam_vectors, const VecXc& combiner) {
  if (jammer_channels.size() != jam_vectors.size())
    throw std::invalid_argument("received_jamming_power: channel/vector count mismatch");
  double p = 0.0;
  for (std::size_t j = 0; j < jam_vectors.size(); ++j) {
    const cxd v = (combiner.adjoint() * jammer_channels[j] * jam_vectors[j])(0, 0);
    p += std::norm(v);
  }
  return p;
}

double secrecy_rate(double sinr_legit, double sinr_eve_worst) {
  if (sinr_legit < 0.0 || sinr_eve_worst < 0.0)
    throw std::domain_error("secrecy_rate: SINRs must be nonnegative");
  const double r = std::log2(1.0 + sinr_legit) - std::log2(1.0 + sinr_eve_worst);
  return std::max(0.0, r);
}

} // namespace nfisac::bf
