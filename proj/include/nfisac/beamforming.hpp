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

#ifndef NFISAC_BEAMFORMING_HPP
#define NFISAC_BEAMFORMING_HPP

#include <utility>
#include <vector>

#include "nfisac/belief.hpp"
#include "nfisac/geometry.hpp"

namespace nfisac::bf {

// A deliberate beampattern null: angle in azimuth degrees, requested
// suppression depth in dB below the mainlobe peak.
struct NotchSpec {
  double angle_deg = 0.0;
  double depth_db = 0.0;
};

// Hybrid precoders, combiners and auxiliary beams for one slot. The analog
// stage is block-diagonal (partial connectivity): each RF chain drives a
// contiguous subarray of size num_tx / rf_chains, unit-modulus entries.
struct PrecoderSet {
  MatXc analog;                 // N_T x N_RF, block-diagonal, unit-modulus entries
  MatXc digital;                // N_RF x K
  MatXc combined;               // analog * digital, columns are the per-stream f_k
  std::vector<VecXc> hn_combiners; // W_u, one per stream
  std::vector<VecXc> jam_vectors;  // g_j for the active jammers
  VecXc sensing_weights;           // w_S
  bool digital_fallback = false;   // matched-filter fallback engaged
};

// Hybrid precoder: per-subarray phase conjugation of each scheduled user's
// dominant near-field path, then regularized zero-forcing across RF chains on
// the effective channel. Columns are scaled to an equal per-stream split of
// power_cap_w, so sum_k ||f_k||^2 == power_cap_w.
PrecoderSet build_hybrid_precoder(const std::vector<geom::CsiEstimate>& channel_estimates,
                                  const std::vector<Vec3>& user_focal_points,
                                  const geom::ArrayGeometry& tx,
                                  const geom::CarrierSpec& carrier, int rf_chains,
                                  double power_cap_w, double rzf_regularization,
                                  bool mrt_digital = false);

// Hamming-blended sensing beam:
//   w_S(tau, p) = [(1-tau) 1 + tau h_Hamming] (Hadamard) a(p), unit power.
VecXc sensing_beam(double taper, const Vec3& focal_point, const geom::ArrayGeometry& geometry,
                   const geom::CarrierSpec& carrier);

struct NotchResult {
  VecXc weights;
  std::vector<double> achieved_suppression_db; // per notch, relative to mainlobe
};

// Projects the weights onto the orthogonal complement of the steering vectors
// at the notch angles (one constraint per notch), then rescales to the
// original power. Extra exact-null constraint points (near-field focals) may
// be appended for leakage enforcement.
NotchResult apply_notches(const VecXc& weights, const std::vector<NotchSpec>& notches,
                          const geom::ArrayGeometry& geometry, const geom::CarrierSpec& carrier,
                          const std::vector<Vec3>& extra_null_points = {});

// |a(az)^H w|^2, the transmit pattern of a weight vector at a far-field azimuth.
double pattern_gain(const VecXc& weights, double azimuth_deg,
                    const geom::ArrayGeometry& geometry, const geom::CarrierSpec& carrier);

// Scan of pattern_gain over a uniform azimuth grid.
std::vector<double> pattern_scan(const VecXc& weights, const geom::ArrayGeometry& geometry,
                                 const geom::CarrierSpec& carrier, double start_deg,
                                 double stop_deg, double step_deg);

struct JamBeamResult {
  VecXc weights;
  bool degenerate = false; // belief support entirely inside the protected set
};

// A jamming target: focal point in the jammer's local frame with a pointing
// weight proportional to the belief mass behind it.
struct JamTarget {
  Vec3 focal_point = Vec3::Zero();
  double weight = 1.0;
};

// Weighted multi-focus jamming beam with protected-angle notches, scaled to
// the jammer's power budget (||g||^2 == power_w).
JamBeamResult jam_beam_from_targets(const std::vector<JamTarget>& targets,
                                    const std::vector<NotchSpec>& protected_angles,
                                    const geom::ArrayGeometry& geometry,
                                    const geom::CarrierSpec& carrier, double power_w);

// Jamming beam aimed at the top-2 MAP peaks of the belief (pointing weights
// proportional to the peak masses), notched at the protected angles and
// scaled to the power budget. Targets falling entirely inside the protected
// set degrade to an isotropic-minus-notches beam (flagged).
JamBeamResult jamming_beam(const belief::AngularBelief& bel,
                           const std::vector<NotchSpec>& protected_angles,
                           const geom::ArrayGeometry& geometry,
                           const geom::CarrierSpec& carrier, double power_w,
                           double target_range_m);

// SINR of stream u through channel H with combiner w:
//   tx_scale |w^H H f_u|^2 / (sum_{k != u} tx_scale |w^H H f_k|^2 + I + N0).
// Per-stream powers ride in the norms of the f_k columns (tx_scale = 1 then).
double sinr_stream(const MatXc& channel, const MatXc& precoder_columns, int stream,
                   const VecXc& combiner, double external_interference_w, double noise_w,
                   double tx_scale = 1.0);

// Friendly-jamming power received through combiner w: sum_j |w^H H_j g_j|^2.
double received_jamming_power(const std::vector<MatXc>& jammer_channels,
                              const std::vector<VecXc>& jam_vectors, const VecXc& combiner);

// [log2(1+sinr_legit) - log2(1+sinr_eve_worst)]^+ in bits/s/Hz.
double secrecy_rate(double sinr_legit, double sinr_eve_worst);

} // namespace nfisac::bf

#endif // NFISAC_BEAMFORMING_HPP
