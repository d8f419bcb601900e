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

#include "nfisac/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace nfisac::geom {

CarrierSpec CarrierSpec::make(double fc_hz, double absorption_db_per_m,
                              double shadowing_sigma_db) {
  if (fc_hz <= 0.0) throw std::domain_error("CarrierSpec: fc must be positive");
  CarrierSpec s;
  s.fc_hz = fc_hz;
  s.wavelength_m = constants::speed_of_light / fc_hz;
  s.wavenumber = 2.0 * constants::pi / s.wavelength_m;
  s.absorption_db_per_m = absorption_db_per_m;
  s.shadowing_sigma_db = shadowing_sigma_db;
  return s;
}

double AbsorptionTable::lookup(double fc_hz) const {
  if (freq_hz.empty()) return 0.0;
  if (fc_hz <= freq_hz.front()) return kappa_db_per_m.front();
  if (fc_hz >= freq_hz.back()) return kappa_db_per_m.back();
  for (std::size_t i = 1; i < freq_hz.size(); ++i) {
    if (fc_hz <= freq_hz[i]) {
      const double t = (fc_hz - freq_hz[i - 1]) / (freq_hz[i] - freq_hz[i - 1]);
      return kappa_db_per_m[i - 1] + t * (kappa_db_per_m[i] - kappa_db_per_m[i - 1]);
    }
  }
  return kappa_db_per_m.back();
}

ArrayGeometry ArrayGeometry::ula_half_wavelength(int num_elements, const CarrierSpec& carrier) {
  if (num_elements < 1) throw std::domain_error("ArrayGeometry: need at least one element");
  ArrayGeometry g;
  g.num_elements = num_elements;
  g.spacing_m = carrier.wavelength_m / 2.0;
  g.element_positions.reserve(num_elements);
  const double half = (num_elements - 1) / 2.0;
  for (int n = 0; n < num_elements; ++n) {
    g.element_positions.push_back({0.0, (n - half) * g.spacing_m, 0.0});
  }
  return g;
}

double rayleigh_boundary(double aperture_m, double wavelength_m) {
  if (wavelength_m <= 0.0) throw std::domain_error("rayleigh_boundary: wavelength must be positive");
  if (aperture_m < 0.0) throw std::domain_error("rayleigh_boundary: aperture must be nonnegative");
  return 2.0 * aperture_m * aperture_m / wavelength_m;
}

double near_field_distance(const Vec3& element_position, const Vec3& focal_point) {
  return (focal_point - element_position).norm();
}

VecXc steering_vector(const ArrayGeometry& geometry, const Vec3& focal_point,
                      const CarrierSpec& carrier) {
  const int n = geometry.num_elements;
  VecXc a(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) {
    const double r = near_field_distance(geometry.element_positions[i], focal_point);
    a(i) = std::polar(scale, -carrier.wavenumber * r);
  }
  return a;
}

VecXc far_field_steering(const ArrayGeometry& geometry, double azimuth_deg,
                         const CarrierSpec& carrier) {
  const int n = geometry.num_elements;
  VecXc a(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double s = std::sin(deg2rad(azimuth_deg));
  for (int i = 0; i < n; ++i) {
    a(i) = std::polar(scale, carrier.wavenumber * geometry.element_positions[i].y() * s);
  }
  return a;
}

double path_loss_db(double distance_m, const CarrierSpec& carrier, double shadow_draw_db) {
  if (distance_m <= 0.0) throw std::domain_error("path_loss_db: distance must be positive");
  const double fspl =
      20.0 * std::log10(4.0 * constants::pi * carrier.fc_hz * distance_m /
                        constants::speed_of_light);
  return fspl + carrier.absorption_db_per_m * distance_m + shadow_draw_db;
}

ChannelMatrix synthesize_channel(const ArrayGeometry& tx, const ArrayGeometry& rx,
                                 const CarrierSpec& carrier, const Vec3& tx_to_rx,
                                 double path_loss_total_db, const SynthesisOptions& options,
                                 std::mt19937_64& rng) {
  if (options.num_paths < 1) throw std::domain_error("synthesize_channel: need num_paths >= 1");

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uang(0.0, 2.0 * constants::pi);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  ChannelMatrix ch;
  ch.path_loss_db = path_loss_total_db;
  ch.components.reserve(options.num_paths);

  // LoS: the geometric path. In the rx local frame (co-oriented arrays) the
  // tx appears at -tx_to_rx.
  {
    MultipathComponent mpc;
    mpc.aod_focal_point = tx_to_rx;
    mpc.aoa_focal_point = -tx_to_rx;
    if (options.los_phase_only) {
      mpc.gain = std::polar(1.0, uang(rng));
    } else {
      mpc.gain = cxd(gauss(rng), gauss(rng)) * inv_sqrt2;
    }
    ch.components.push_back(mpc);
  }

  const double nlos_scale = std::pow(10.0, -options.nlos_attenuation_db / 20.0);
  for (int l = 1; l < options.num_paths; ++l) {
    MultipathComponent mpc;
    // Scatterer displaced around the direct path; single-bounce geometry.
    Vec3 scatter = tx_to_rx * std::uniform_real_distribution<double>(0.2, 0.8)(rng);
    scatter += Vec3(gauss(rng), gauss(rng), 0.0) * options.nlos_spread_m * 0.5;
    mpc.aod_focal_point = scatter;
    mpc.aoa_focal_point = scatter - tx_to_rx;
    mpc.gain = cxd(gauss(rng), gauss(rng)) * inv_sqrt2 * nlos_scale;
    ch.components.push_back(mpc);
  }

  const double amp = std::pow(10.0, -path_loss_total_db / 20.0);
  MatXc h = MatXc::Zero(rx.num_elements, tx.num_elements);
  for (const auto& mpc : ch.components) {
    const VecXc a_rx = steering_vector(rx, mpc.aoa_focal_point, carrier);
    const VecXc a_tx = steering_vector(tx, mpc.aod_focal_point, carrier);
    h.noalias() += mpc.gain * (a_rx * a_tx.adjoint());
  }
  ch.entries = amp * h;
  return ch;
}

CsiEstimate perturb_csi(const ChannelMatrix& true_channel, double eps_csi,
                        std::mt19937_64& rng) {
  if (eps_csi < 0.0) throw std::domain_error("perturb_csi: eps must be nonnegative");
  CsiEstimate est;
  est.error_bound = eps_csi;
  if (eps_csi == 0.0) {
    est.estimate = true_channel.entries;
    return est;
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatXc err(true_channel.entries.rows(), true_channel.entries.cols());
  for (Eigen::Index j = 0; j < err.cols(); ++j)
    for (Eigen::Index i = 0; i < err.rows(); ++i)
      err(i, j) = cxd(gauss(rng), gauss(rng));
  // Draw a radius uniform in the ball volume sense, then rescale. Any draw
  // landing outside the ball is projected onto it.
  const double target = std::sqrt(eps_csi) *
                        std::pow(std::uniform_real_distribution<double>(0.0, 1.0)(rng), 0.5);
  const double norm = err.norm();
  if (norm > 0.0) err *= std::min(target, std::sqrt(eps_csi)) / norm;
  est.estimate = true_channel.entries + err;
  return est;
}

} // namespace nfisac::geom
