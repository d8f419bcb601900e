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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nfisac/geometry.hpp"

using namespace nfisac;
using namespace nfisac::geom;

TEST_CASE("rayleigh boundary") {
  CHECK(rayleigh_boundary(0.0, 0.003) == doctest::Approx(0.0));
  CHECK(rayleigh_boundary(1.0, 2.0) == doctest::Approx(1.0));

  // 128-element half-wavelength array at 28 GHz, evaluated by hand:
  // d = c/(2*28e9), D = 127 d, 2 D^2 / lambda = 86.34558134075 m.
  const CarrierSpec c28 = CarrierSpec::make(28e9);
  const ArrayGeometry a = ArrayGeometry::ula_half_wavelength(128, c28);
  CHECK(a.spacing_m == doctest::Approx(c28.wavelength_m / 2).epsilon(1e-12));
  CHECK(rayleigh_boundary(a.aperture_m(), c28.wavelength_m) ==
        doctest::Approx(86.34558134075).epsilon(1e-11));

  CHECK_THROWS_AS(rayleigh_boundary(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(rayleigh_boundary(-1.0, 1.0), std::domain_error);
}

TEST_CASE("near-field distance") {
  CHECK(near_field_distance({0, 0, 0}, {3, 4, 0}) == doctest::Approx(5.0));
  CHECK(near_field_distance({0, 2, 0}, {0, 2, 0}) == doctest::Approx(0.0));
  CHECK(near_field_distance({0, 1, 0}, {1, 2, 2}) ==
        doctest::Approx(2.449489742783178).epsilon(1e-14));

  // Symmetry and triangle inequality on random triples.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    const Vec3 a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)}, c{u(rng), u(rng), u(rng)};
    CHECK(near_field_distance(a, b) == doctest::Approx(near_field_distance(b, a)));
    CHECK(near_field_distance(a, c) <=
          near_field_distance(a, b) + near_field_distance(b, c) + 1e-9);
  }
}

TEST_CASE("steering vector") {
  const CarrierSpec carrier = CarrierSpec::make(28e9);

  SUBCASE("single element is the unit phase") {
    const ArrayGeometry g = ArrayGeometry::ula_half_wavelength(1, carrier);
    const VecXc a = steering_vector(g, {5, 1, 0}, carrier);
    REQUIRE(a.size() == 1);
    CHECK(std::abs(a(0)) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("symmetric indices see equal phase for boresight focal points") {
    const ArrayGeometry g = ArrayGeometry::ula_half_wavelength(8, carrier);
    const VecXc a = steering_vector(g, {12.0, 0.0, 0.0}, carrier);
    for (int n = 0; n < 4; ++n) {
      CHECK(std::abs(a(n) - a(7 - n)) < 1e-12);
    }
  }

  SUBCASE("element-wise brute-force oracle, N=4") {
    const ArrayGeometry g = ArrayGeometry::ula_half_wavelength(4, carrier);
    const Vec3 p{1.0, 0.5, 0.0};
    const VecXc a = steering_vector(g, p, carrier);
    for (int n = 0; n < 4; ++n) {
      const double y = (n - 1.5) * g.spacing_m;
      const double r = std::sqrt(p.x() * p.x() + (p.y() - y) * (p.y() - y));
      const cxd expect = std::exp(cxd(0.0, -carrier.wavenumber * r)) / 2.0;
      CHECK(std::abs(a(n) - expect) < 1e-12);
    }
  }

  SUBCASE("unit norm for random sizes and focal points") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-80.0, 80.0);
    std::uniform_int_distribution<int> usize(1, 256);
    for (int i = 0; i < 100; ++i) {
      const ArrayGeometry g = ArrayGeometry::ula_half_wavelength(usize(rng), carrier);
      const VecXc a = steering_vector(g, {std::abs(u(rng)) + 1.0, u(rng), 0.0}, carrier);
      CHECK(std::abs(a.norm() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("path loss") {
  SUBCASE("log argument of one gives zero dB") {
    const CarrierSpec c = CarrierSpec::make(constants::speed_of_light / (4.0 * constants::pi));
    CHECK(path_loss_db(1.0, c, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("independent FSPL value plus linear absorption") {
    // FSPL(100 m, 300 GHz) = 121.99020831627662 dB, kappa d = 10 dB.
    CarrierSpec c = CarrierSpec::make(300e9, 0.1);
    CHECK(path_loss_db(100.0, c, 0.0) ==
          doctest::Approx(121.99020831627662 + 10.0).epsilon(1e-12));
  }

  SUBCASE("doubling the distance adds 20 log10(2)") {
    const CarrierSpec c = CarrierSpec::make(100e9, 0.0);
    const double d1 = path_loss_db(17.0, c, 0.0);
    const double d2 = path_loss_db(34.0, c, 0.0);
    CHECK(d2 - d1 == doctest::Approx(6.020599913279624).epsilon(1e-12));
  }

  SUBCASE("strictly increasing in distance for nonnegative absorption") {
    const CarrierSpec c = CarrierSpec::make(220e9, 0.05);
    double prev = path_loss_db(0.5, c, 1.3);
    for (double d = 1.0; d < 120.0; d += 2.3) {
      const double cur = path_loss_db(d, c, 1.3);
      CHECK(cur > prev);
      prev = cur;
    }
  }

  CHECK_THROWS_AS(path_loss_db(0.0, CarrierSpec::make(28e9), 0.0), std::domain_error);
  CHECK_THROWS_AS(path_loss_db(-3.0, CarrierSpec::make(28e9), 0.0), std::domain_error);
}

TEST_CASE("absorption table interpolation") {
  AbsorptionTable table;
  CHECK(table.lookup(28e9) == doctest::Approx(6e-5));
  CHECK(table.lookup(410e9) == doctest::Approx(0.30));
  CHECK(table.lookup(1e9) == doctest::Approx(6e-5));    // clamped low
  CHECK(table.lookup(1000e9) == doctest::Approx(0.30)); // clamped high
  const double mid = table.lookup(90e9); // between 60 and 120 GHz
  CHECK(mid == doctest::Approx(0.5 * (0.015 + 0.002)));
}

TEST_CASE("channel synthesis") {
  const CarrierSpec carrier = CarrierSpec::make(100e9);
  const ArrayGeometry tx = ArrayGeometry::ula_half_wavelength(8, carrier);
  const ArrayGeometry rx = ArrayGeometry::ula_half_wavelength(4, carrier);

  SUBCASE("single unit-gain LoS path is the steering outer product") {
    SynthesisOptions opt;
    opt.num_paths = 1;
    opt.los_phase_only = true;
    std::mt19937_64 rng(11);
    const Vec3 rel{20.0, 5.0, 0.0};
    ChannelMatrix ch = synthesize_channel(tx, rx, carrier, rel, 0.0, opt, rng);
    REQUIRE(ch.components.size() == 1);
    const cxd gain = ch.components[0].gain;
    CHECK(std::abs(std::abs(gain) - 1.0) < 1e-12);
    const MatXc expect = gain * (steering_vector(rx, -rel, carrier) *
                                 steering_vector(tx, rel, carrier).adjoint());
    CHECK((ch.entries - expect).norm() < 1e-12);
  }

  SUBCASE("numerical rank bounded by the component count") {
    SynthesisOptions opt;
    opt.num_paths = 3;
    std::mt19937_64 rng(5);
    const ChannelMatrix ch =
        synthesize_channel(tx, rx, carrier, {40.0, -10.0, 0.0}, 90.0, opt, rng);
    Eigen::JacobiSVD<MatXc> svd(ch.entries);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > sv(0) * 1e-10) ++rank;
    CHECK(rank <= 3);
  }

  SUBCASE("entries match a brute-force double loop, 2x2 arrays") {
    const ArrayGeometry t2 = ArrayGeometry::ula_half_wavelength(2, carrier);
    const ArrayGeometry r2 = ArrayGeometry::ula_half_wavelength(2, carrier);
    SynthesisOptions opt;
    opt.num_paths = 2;
    opt.los_phase_only = false;
    std::mt19937_64 rng(42);
    const Vec3 rel{15.0, 3.0, 0.0};
    const double pl_db = 60.0;
    const ChannelMatrix ch = synthesize_channel(t2, r2, carrier, rel, pl_db, opt, rng);

    const double amp = std::pow(10.0, -pl_db / 20.0);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        cxd sum(0.0, 0.0);
        for (const auto& mpc : ch.components) {
          const double r_rx = near_field_distance(r2.element_positions[i], mpc.aoa_focal_point);
          const double r_tx = near_field_distance(t2.element_positions[j], mpc.aod_focal_point);
          const cxd a_rx = std::polar(1.0 / std::sqrt(2.0), -carrier.wavenumber * r_rx);
          const cxd a_tx = std::polar(1.0 / std::sqrt(2.0), -carrier.wavenumber * r_tx);
          sum += mpc.gain * a_rx * std::conj(a_tx);
        }
        CHECK(std::abs(ch.entries(i, j) - amp * sum) < 1e-12);
      }
    }
  }

  SUBCASE("path-loss scaling is exact in Frobenius norm") {
    SynthesisOptions opt;
    opt.num_paths = 2;
    std::mt19937_64 rng1(9), rng2(9);
    const Vec3 rel{25.0, 0.0, 0.0};
    const ChannelMatrix ch0 = synthesize_channel(tx, rx, carrier, rel, 0.0, opt, rng1);
    const ChannelMatrix ch1 = synthesize_channel(tx, rx, carrier, rel, 40.0, opt, rng2);
    CHECK(ch1.entries.norm() ==
          doctest::Approx(ch0.entries.norm() * std::pow(10.0, -40.0 / 20.0)).epsilon(1e-12));
  }

  SUBCASE("channel is linear in the path gains") {
    SynthesisOptions opt;
    opt.num_paths = 3;
    std::mt19937_64 rng(13);
    ChannelMatrix ch = synthesize_channel(tx, rx, carrier, {30.0, 8.0, 0.0}, 70.0, opt, rng);
    const double amp = std::pow(10.0, -70.0 / 20.0);
    auto rebuild = [&](cxd scale, bool conj_gains) {
      MatXc m = MatXc::Zero(4, 8);
      for (const auto& mpc : ch.components) {
        const cxd g = conj_gains ? std::conj(mpc.gain) : mpc.gain;
        m += scale * g * (steering_vector(rx, mpc.aoa_focal_point, carrier) *
                          steering_vector(tx, mpc.aod_focal_point, carrier).adjoint());
      }
      return MatXc(amp * m);
    };
    // Reconstruction matches, scaling the gains scales the channel, and the
    // conjugate-gain rebuild is the mirror combination: gains enter linearly.
    CHECK((ch.entries - rebuild(1.0, false)).norm() < 1e-12);
    CHECK((rebuild(cxd(0.0, 2.0), false) - cxd(0.0, 2.0) * ch.entries).norm() < 1e-12);
    const MatXc sum = rebuild(1.0, false) + rebuild(1.0, true);
    MatXc real_part = MatXc::Zero(4, 8);
    for (const auto& mpc : ch.components) {
      real_part += 2.0 * mpc.gain.real() *
                   (steering_vector(rx, mpc.aoa_focal_point, carrier) *
                    steering_vector(tx, mpc.aod_focal_point, carrier).adjoint());
    }
    CHECK((sum - amp * real_part).norm() < 1e-12);
  }

  SUBCASE("CN(0,1) gain statistics when Rayleigh LoS is requested") {
    SynthesisOptions opt;
    opt.num_paths = 1;
    opt.los_phase_only = false;
    std::mt19937_64 rng(2024);
    double mean_power = 0.0;
    cxd mean(0.0, 0.0);
    const int trials = 4000;
    for (int i = 0; i < trials; ++i) {
      const ChannelMatrix ch = synthesize_channel(tx, rx, carrier, {20, 0, 0}, 0.0, opt, rng);
      mean_power += std::norm(ch.components[0].gain);
      mean += ch.components[0].gain;
    }
    CHECK(mean_power / trials == doctest::Approx(1.0).epsilon(0.1));
    CHECK(std::abs(mean) / trials < 0.05);
  }
}

TEST_CASE("bounded CSI perturbation") {
  const CarrierSpec carrier = CarrierSpec::make(100e9);
  const ArrayGeometry tx = ArrayGeometry::ula_half_wavelength(4, carrier);
  const ArrayGeometry rx = ArrayGeometry::ula_half_wavelength(4, carrier);
  SynthesisOptions opt;
  opt.num_paths = 2;
  std::mt19937_64 rng(77);
  const ChannelMatrix ch = synthesize_channel(tx, rx, carrier, {22, 4, 0}, 20.0, opt, rng);

  SUBCASE("zero error ball returns the channel exactly") {
    auto est = perturb_csi(ch, 0.0, rng);
    CHECK((est.estimate - ch.entries).norm() == 0.0);
  }

  SUBCASE("Monte-Carlo projection check: 1000 draws never exceed the ball") {
    double max_err = 0.0;
    for (int i = 0; i < 1000; ++i) {
      auto est = perturb_csi(ch, 0.01, rng);
      max_err = std::max(max_err, (est.estimate - ch.entries).squaredNorm());
    }
    CHECK(max_err <= 0.01 + 1e-15);
    CHECK(max_err > 0.0);
  }

  CHECK_THROWS_AS(perturb_csi(ch, -1.0, rng), std::domain_error);
}
