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

#ifndef NFISAC_COMMON_HPP
#define NFISAC_COMMON_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>

namespace nfisac {

using cxd = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using VecXc = Eigen::VectorXcd;
using MatXc = Eigen::MatrixXcd;
using VecXd = Eigen::VectorXd;

namespace constants {
inline constexpr double speed_of_light = 299792458.0; // m/s
inline constexpr double pi = 3.141592653589793238462643383279502884;
} // namespace constants

inline double deg2rad(double deg) { return deg * constants::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / constants::pi; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// Azimuth convention: angle from the +x boresight toward +y, in the xy-plane.
// Arrays are collinear along y, so the unambiguous field of view is [-90, 90] deg.
inline Vec3 polar_point(double range_m, double azimuth_deg) {
  const double az = deg2rad(azimuth_deg);
  return {range_m * std::cos(az), range_m * std::sin(az), 0.0};
}

inline double azimuth_deg_of(const Vec3& p) {
  return rad2deg(std::atan2(p.y(), p.x()));
}

// SplitMix64: cheap, well-mixed stream derivation so that every link/slot can
// own an independent, reproducible RNG regardless of evaluation order.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

inline std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_keys(mix_keys(a, b), c);
}

inline std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                              std::uint64_t d) {
  return mix_keys(mix_keys(a, b, c), d);
}

inline std::mt19937_64 make_rng(std::uint64_t key) { return std::mt19937_64(splitmix64(key)); }

} // namespace nfisac

#endif // NFISAC_COMMON_HPP
