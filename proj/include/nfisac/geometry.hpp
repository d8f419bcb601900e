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

#ifndef NFISAC_GEOMETRY_HPP
#define NFISAC_GEOMETRY_HPP

#include <cstdint>
#include <random>
#include <vector>

#include "nfisac/common.hpp"

namespace nfisac::geom {

// Carrier description. Wavelength and wavenumber are derived, never stored
// independently of fc.
struct CarrierSpec {
  double fc_hz = 100e9;
  double wavelength_m = constants::speed_of_light / 100e9;
  double wavenumber = 2.0 * constants::pi / (constants::speed_of_light / 100e9);
  double absorption_db_per_m = 0.0; // molecular absorption kappa(fc)
  double shadowing_sigma_db = 4.0;

  static CarrierSpec make(double fc_hz, double absorption_db_per_m = 0.0,
                          double shadowing_sigma_db = 4.0);
};

// Molecular absorption lookup, piecewise-linear over the supported band grid.
// Values are conservative literature-typical defaults in dB/m and can be
// overridden through the scenario config.
struct AbsorptionTable {
  std::vector<double> freq_hz{28e9, 60e9, 120e9, 220e9, 300e9, 340e9, 410e9};
  std::vector<double> kappa_db_per_m{6e-5, 0.015, 0.002, 0.03, 0.04, 0.13, 0.30};

  double lookup(double fc_hz) const;
};

// Uniform linear array along the y-axis, centered at the origin of its local
// frame. Element n sits at y = (n - (N-1)/2) * spacing.
struct ArrayGeometry {
  int num_elements = 1;
  double spacing_m = 0.0;
  std::vector<Vec3> element_positions;

  static ArrayGeometry ula_half_wavelength(int num_elements, const CarrierSpec& carrier);
  double aperture_m() const { return (num_elements - 1) * spacing_m; }
};

struct MultipathComponent {
  cxd gain{1.0, 0.0};
  Vec3 aod_focal_point = Vec3::Zero(); // in the tx array local frame
  Vec3 aoa_focal_point = Vec3::Zero(); // in the rx array local frame
};

struct ChannelMatrix {
  MatXc entries;          // rx_elements x tx_elements
  double path_loss_db = 0.0;
  std::vector<MultipathComponent> components;
};

struct CsiEstimate {
  MatXc estimate;
  double error_bound = 0.0; // squared-Frobenius ball radius
};

// Rayleigh (Fraunhofer) boundary 2 D^2 / lambda.
double rayleigh_boundary(double aperture_m, double wavelength_m);

// Exact spherical-wavefront propagation distance from one element to a focal
// point, both expressed in the array's local frame.
double near_field_distance(const Vec3& element_position, const Vec3& focal_point);

// Near-field steering vector: entry n = exp(-j k0 r_n(p)) / sqrt(N).
// Unit Euclidean norm by construction.
VecXc steering_vector(const ArrayGeometry& geometry, const Vec3& focal_point,
                      const CarrierSpec& carrier);

// Far-field limit of the steering vector at a given azimuth (common range
// phase dropped): entry n = exp(+j k0 y_n sin(az)) / sqrt(N).
VecXc far_field_steering(const ArrayGeometry& geometry, double azimuth_deg,
                         const CarrierSpec& carrier);

// Free-space spreading + molecular absorption + shadowing, in dB.
double path_loss_db(double distance_m, const CarrierSpec& carrier, double shadow_draw_db);

struct SynthesisOptions {
  int num_paths = 3;                 // 1 LoS + (num_paths-1) NLoS
  double nlos_attenuation_db = 10.0; // NLoS gain backoff relative to LoS
  double nlos_spread_m = 30.0;       // scatterer offset scale around the link
  bool los_phase_only = true;        // LoS gain e^{j theta}: no Rayleigh fade on the
                                     // geometric path (set false for CN(0,1) gains)
};

// Clustered narrowband multipath channel
//   H = 10^(-PL/20) * sum_l alpha_l a_rx(p_l^AoA) a_tx(p_l^AoD)^H
// with spherical-phase steering on both sides. The first component is the
// LoS geometric path; path gains are drawn from the supplied RNG.
ChannelMatrix synthesize_channel(const ArrayGeometry& tx, const ArrayGeometry& rx,
                                 const CarrierSpec& carrier, const Vec3& tx_to_rx,
                                 double path_loss_total_db, const SynthesisOptions& options,
                                 std::mt19937_64& rng);

// Bounded-error CSI model: estimate = H + E with ||E||_F^2 <= eps. The error
// is drawn Gaussian and rescaled onto the ball when it exceeds the bound.
CsiEstimate perturb_csi(const ChannelMatrix& true_channel, double eps_csi,
                        std::mt19937_64& rng);

} // namespace nfisac::geom

#endif // NFISAC_GEOMETRY_HPP
