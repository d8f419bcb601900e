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

#include "nfisac/beamforming.hpp"

using namespace nfisac;
using namespace nfisac::bf;

namespace {

const geom::CarrierSpec kCarrier = geom::CarrierSpec::make(100e9);

geom::CsiEstimate exact_estimate(const geom::ChannelMatrix& ch) {
  geom::CsiEstimate est;
  est.estimate = ch.entries;
  est.error_bound = 0.0;
  return est;
}

geom::ChannelMatrix los_channel(const geom::ArrayGeometry& tx, const geom::ArrayGeometry& rx,
                                const Vec3& rel, double pl_db, std::mt19937_64& rng) {
  geom::SynthesisOptions opt;
  opt.num_paths = 1;
  opt.los_phase_only = true;
  return geom::synthesize_channel(tx, rx, kCarrier, rel, pl_db, opt, rng);
}

} // namespace

TEST_CASE("hybrid precoder") {
  const geom::ArrayGeometry bs = geom::ArrayGeometry::ula_half_wavelength(16, kCarrier);
  const geom::ArrayGeometry hn = geom::ArrayGeometry::ula_half_wavelength(4, kCarrier);
  std::mt19937_64 rng(5);

  SUBCASE("single LoS user: combined precoder colinear with conjugate steering") {
    const Vec3 pos{30.0, 5.0, 0.0};
    const geom::ChannelMatrix ch = los_channel(bs, hn, pos, 0.0, rng);
    const PrecoderSet set = build_hybrid_precoder({exact_estimate(ch)}, {pos}, bs, kCarrier,
                                                  4, 2.0, 0.0);
    // Beamforming gain N |<a, f/||f||>|^2 within 0.1 dB of the full array.
    const VecXc a = geom::steering_vector(bs, pos, kCarrier);
    const VecXc f = set.combined.col(0) / set.combined.col(0).norm();
    const double gain = 16.0 * std::norm(a.dot(f));
    CHECK(linear_to_db(gain) > linear_to_db(16.0) - 0.1);
  }

  SUBCASE("total power equals the cap exactly after scaling") {
    std::vector<geom::CsiEstimate> ests;
    std::vector<Vec3> focals;
    for (int u = 0; u < 3; ++u) {
      const Vec3 pos{25.0 + 5.0 * u, -10.0 + 9.0 * u, 0.0};
      geom::SynthesisOptions opt;
      opt.num_paths = 2;
      ests.push_back(exact_estimate(
          geom::synthesize_channel(bs, hn, kCarrier, pos, 60.0, opt, rng)));
      focals.push_back(pos);
    }
    const PrecoderSet set =
        build_hybrid_precoder(ests, focals, bs, kCarrier, 8, 7.25, 1e-6);
    CHECK(set.combined.squaredNorm() == doctest::Approx(7.25).epsilon(1e-12));
  }

  SUBCASE("analog stage is block-diagonal with unit-modulus nonzero entries") {
    std::vector<geom::CsiEstimate> ests;
    std::vector<Vec3> focals;
    for (int u = 0; u < 2; ++u) {
      const Vec3 pos{20.0, -8.0 + 16.0 * u, 0.0};
      ests.push_back(exact_estimate(los_channel(bs, hn, pos, 10.0, rng)));
      focals.push_back(pos);
    }
    const PrecoderSet set = build_hybrid_precoder(ests, focals, bs, kCarrier, 8, 1.0, 0.0);
    const int sub = 16 / 8;
    for (int c = 0; c < 8; ++c) {
      for (int r = 0; r < 16; ++r) {
        const cxd v = set.analog(r, c);
        if (r / sub == c) {
          CHECK(std::abs(std::abs(v) - 1.0) < 1e-12);
        } else {
          CHECK(std::abs(v) == 0.0);
        }
      }
    }
  }

  SUBCASE("RZF suppresses cross-stream interference; dense oracle agrees") {
    const geom::ArrayGeometry bs8 = geom::ArrayGeometry::ula_half_wavelength(8, kCarrier);
    std::mt19937_64 r2(99);
    std::vector<geom::CsiEstimate> ests;
    std::vector<Vec3> focals{{30.0, -15.0, 0.0}, {35.0, 18.0, 0.0}};
    for (const auto& pos : focals)
      ests.push_back(exact_estimate(los_channel(bs8, hn, pos, 0.0, r2)));
    const PrecoderSet set = build_hybrid_precoder(ests, focals, bs8, kCarrier, 4, 2.0, 1e-9);

    // Independent dense-RZF oracle on the same effective channel.
    MatXc analog = MatXc::Zero(8, 4);
    const int sub = 2;
    for (int c = 0; c < 4; ++c) {
      const VecXc a = geom::steering_vector(bs8, focals[c % 2], kCarrier);
      for (int r = 0; r < sub; ++r)
        analog(c * sub + r, c) = a(c * sub + r) / std::abs(a(c * sub + r));
    }
    MatXc eff(2, 4);
    for (int u = 0; u < 2; ++u) {
      const VecXc w = (ests[u].estimate * geom::steering_vector(bs8, focals[u], kCarrier))
                          .normalized();
      eff.row(u) = w.adjoint() * ests[u].estimate * analog;
    }
    MatXc gram = eff * eff.adjoint();
    gram.diagonal().array() += 1e-9;
    MatXc dig = eff.adjoint() * gram.inverse();
    MatXc combined = analog * dig;
    for (int u = 0; u < 2; ++u) combined.col(u) *= 1.0 / combined.col(u).norm();

    for (int u = 0; u < 2; ++u) {
      const VecXc w_u = (ests[u].estimate * set.combined.col(u)).normalized();
      const double direct = std::norm((w_u.adjoint() * ests[u].estimate *
                                       set.combined.col(u))(0, 0));
      const double cross = std::norm((w_u.adjoint() * ests[u].estimate *
                                      set.combined.col(1 - u))(0, 0));
      CHECK(linear_to_db(cross / direct) < -30.0);

      // Oracle agreement: identical normalized columns.
      const VecXc impl_col = set.combined.col(u).normalized();
      CHECK((impl_col - combined.col(u)).norm() < 1e-6);
    }
  }

  CHECK_THROWS(build_hybrid_precoder({}, {}, bs, kCarrier, 4, 1.0, 0.0));
}

TEST_CASE("sensing beam") {
  const geom::ArrayGeometry bs = geom::ArrayGeometry::ula_half_wavelength(64, kCarrier);
  const Vec3 focal{40.0, 10.0, 0.0};

  SUBCASE("taper 0 reduces to the steering vector") {
    const VecXc w = sensing_beam(0.0, focal, bs, kCarrier);
    const VecXc a = geom::steering_vector(bs, focal, kCarrier);
    CHECK((w - a).norm() < 1e-12);
    CHECK(std::abs(w.norm() - 1.0) < 1e-12);
  }

  SUBCASE("taper 1 suppresses the first sidelobe by more than 10 dB") {
    const VecXc w0 = sensing_beam(0.0, focal, bs, kCarrier);
    const VecXc w1 = sensing_beam(1.0, focal, bs, kCarrier);
    auto first_sidelobe_ratio_db = [&](const VecXc& w) {
      const std::vector<double> scan = pattern_scan(w, bs, kCarrier, -90.0, 90.0, 0.05);
      const std::size_t peak =
          std::max_element(scan.begin(), scan.end()) - scan.begin();
      // walk right to the first null, then to the first sidelobe crest
      std::size_t i = peak;
      while (i + 1 < scan.size() && scan[i + 1] < scan[i]) ++i;
      std::size_t j = i;
      while (j + 1 < scan.size() && scan[j + 1] > scan[j]) ++j;
      return linear_to_db(scan[peak] / scan[j]);
    };
    const double r0 = first_sidelobe_ratio_db(w0);
    const double r1 = first_sidelobe_ratio_db(w1);
    CHECK(r1 - r0 > 10.0);
    CHECK(r1 > r0); // peak-to-first-sidelobe strictly larger under the taper
  }

  SUBCASE("taper 0.5 amplitudes are the midpoint of the profiles before normalization") {
    const int n = 64;
    const VecXc a = geom::steering_vector(bs, focal, kCarrier);
    const VecXc w_half = sensing_beam(0.5, focal, bs, kCarrier);
    VecXc blend(n);
    for (int i = 0; i < n; ++i) {
      const double ham = 0.54 - 0.46 * std::cos(2.0 * constants::pi * i / (n - 1));
      blend(i) = (0.5 + 0.5 * ham) * a(i);
    }
    blend /= blend.norm();
    CHECK((w_half - blend).norm() < 1e-12);
  }

  CHECK_THROWS_AS(sensing_beam(-0.1, focal, bs, kCarrier), std::domain_error);
  CHECK_THROWS_AS(sensing_beam(1.1, focal, bs, kCarrier), std::domain_error);
}

TEST_CASE("notch projection") {
  const geom::ArrayGeometry bs = geom::ArrayGeometry::ula_half_wavelength(64, kCarrier);
  const VecXc base = geom::steering_vector(bs, {50.0, 0.0, 0.0}, kCarrier);

  SUBCASE("empty notch list is the identity") {
    const NotchResult r = apply_notches(base, {}, bs, kCarrier);
    CHECK((r.weights - base).norm() == 0.0);
  }

  SUBCASE("single notch gives at least 60 dB suppression at the notch angle") {
    const NotchResult r = apply_notches(base, {{25.0, 30.0}}, bs, kCarrier);
    const auto scan = pattern_scan(r.weights, bs, kCarrier, -90, 90, 0.1);
    const double peak = *std::max_element(scan.begin(), scan.end());
    const double at_notch = pattern_gain(r.weights, 25.0, bs, kCarrier);
    CHECK(linear_to_db(at_notch / peak) < -60.0);
    REQUIRE(r.achieved_suppression_db.size() == 1);
    CHECK(r.achieved_suppression_db[0] > 60.0);
  }

  SUBCASE("power preserved to 1e-9 after rescaling") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    VecXc w(64);
    for (int i = 0; i < 64; ++i) w(i) = cxd(g(rng), g(rng));
    const double p0 = w.squaredNorm();
    const NotchResult r = apply_notches(w, {{10.0, 20.0}, {-35.0, 20.0}}, bs, kCarrier);
    CHECK(std::abs(r.weights.squaredNorm() - p0) < 1e-9 * p0);
  }

  SUBCASE("more notches than degrees of freedom is an error") {
    const geom::ArrayGeometry tiny = geom::ArrayGeometry::ula_half_wavelength(3, kCarrier);
    const VecXc w = geom::steering_vector(tiny, {10, 0, 0}, kCarrier);
    std::vector<NotchSpec> many = {{-60, 10}, {-20, 10}, {20, 10}};
    CHECK_THROWS(apply_notches(w, many, tiny, kCarrier));
  }

  SUBCASE("notch angle outside the grid span is an error") {
    CHECK_THROWS(apply_notches(base, {{95.0, 10.0}}, bs, kCarrier));
  }
}

TEST_CASE("jamming beam") {
  const geom::ArrayGeometry hn = geom::ArrayGeometry::ula_half_wavelength(16, kCarrier);

  SUBCASE("delta belief aims a pure steering beam scaled to power") {
    belief::AngularBelief bel = belief::AngularBelief::uniform(181, 3.0);
    std::fill(bel.probs.begin(), bel.probs.end(), 0.0);
    bel.probs[120] = 1.0; // 30 deg
    const JamBeamResult r = jamming_beam(bel, {}, hn, kCarrier, 2.0, 20.0);
    CHECK_FALSE(r.degenerate);
    CHECK(r.weights.squaredNorm() == doctest::Approx(2.0).epsilon(1e-12));
    const VecXc expect =
        geom::steering_vector(hn, polar_point(20.0, bel.grid_deg[120]), kCarrier) *
        std::sqrt(2.0);
    CHECK((r.weights - expect).norm() < 1e-9);
  }

  SUBCASE("protected angles keep the requested suppression") {
    belief::AngularBelief bel = belief::AngularBelief::uniform(181, 3.0);
    std::fill(bel.probs.begin(), bel.probs.end(), 0.0);
    bel.probs[135] = 1.0; // 45 deg
    const std::vector<NotchSpec> prot = {{-20.0, 25.0}};
    const JamBeamResult r = jamming_beam(bel, prot, hn, kCarrier, 1.0, 25.0);
    const auto scan = pattern_scan(r.weights, hn, kCarrier, -90, 90, 0.1);
    const double peak = *std::max_element(scan.begin(), scan.end());
    const double at_notch = pattern_gain(r.weights, -20.0, hn, kCarrier);
    CHECK(linear_to_db(peak / std::max(at_notch, 1e-30)) >= 25.0);
  }

  SUBCASE("bimodal belief peaks near both angles (64-element scan oracle)") {
    const geom::ArrayGeometry big = geom::ArrayGeometry::ula_half_wavelength(64, kCarrier);
    belief::AngularBelief bel = belief::AngularBelief::uniform(181, 3.0);
    std::fill(bel.probs.begin(), bel.probs.end(), 0.0);
    const int b1 = 50, b2 = 125; // -40 deg and +35 deg
    bel.probs[b1] = 0.5;
    bel.probs[b2] = 0.5;
    const JamBeamResult r = jamming_beam(bel, {}, big, kCarrier, 1.0, 30.0);
    const auto scan = pattern_scan(r.weights, big, kCarrier, -90, 90, 1.0);
    std::vector<double> peaks_deg;
    const double top = *std::max_element(scan.begin(), scan.end());
    for (std::size_t i = 1; i + 1 < scan.size(); ++i) {
      if (scan[i] > scan[i - 1] && scan[i] >= scan[i + 1] && scan[i] > 0.25 * top)
        peaks_deg.push_back(-90.0 + i);
    }
    auto near = [&](double angle) {
      for (double p : peaks_deg)
        if (std::abs(p - angle) <= 1.0) return true;
      return false;
    };
    CHECK(near(bel.grid_deg[b1]));
    CHECK(near(bel.grid_deg[b2]));
  }

  SUBCASE("belief entirely inside the protected set degrades to isotropic") {
    belief::AngularBelief bel = belief::AngularBelief::uniform(5, 10.0);
    std::fill(bel.probs.begin(), bel.probs.end(), 0.0);
    bel.probs[2] = 1.0; // 0 deg
    const std::vector<NotchSpec> prot = {{0.0, 20.0}};
    const JamBeamResult r = jamming_beam(bel, prot, hn, kCarrier, 1.5, 20.0);
    CHECK(r.degenerate);
    CHECK(r.weights.squaredNorm() == doctest::Approx(1.5).epsilon(1e-9));
  }
}

TEST_CASE("SINR evaluation") {
  const geom::ArrayGeometry bs = geom::ArrayGeometry::ula_half_wavelength(8, kCarrier);
  const geom::ArrayGeometry hn = geom::ArrayGeometry::ula_half_wavelength(4, kCarrier);
  std::mt19937_64 rng(17);

  auto random_matrix = [&](int r, int c) {
    std::normal_distribution<double> g(0.0, 1.0);
    MatXc m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = cxd(g(rng), g(rng));
    return m;
  };

  SUBCASE("single stream reduces to SNR") {
    const MatXc h = random_matrix(4, 8);
    MatXc f = random_matrix(8, 1);
    const VecXc w = (h * f.col(0)).normalized();
    const double n0 = 1e-9;
    const double sinr = sinr_stream(h, f, 0, w, 0.0, n0);
    const double snr = std::norm((w.adjoint() * h * f.col(0))(0, 0)) / n0;
    CHECK(sinr == doctest::Approx(snr).epsilon(1e-12));
  }

  SUBCASE("doubling the noise halves the SINR") {
    const MatXc h = random_matrix(4, 8);
    const MatXc f = random_matrix(8, 1);
    const VecXc w = (h * f.col(0)).normalized();
    const double s1 = sinr_stream(h, f, 0, w, 0.0, 2e-10);
    const double s2 = sinr_stream(h, f, 0, w, 0.0, 4e-10);
    CHECK(s1 / s2 == doctest::Approx(2.0).epsilon(1e-12));
  }

  SUBCASE("three-stream instance matches a term-by-term oracle") {
    const MatXc h = random_matrix(4, 8);
    const MatXc f = random_matrix(8, 3);
    const VecXc w = (h * f.col(1)).normalized();
    const double i_u = 3.7e-10, n0 = 9.1e-11;
    const double sinr = sinr_stream(h, f, 1, w, i_u, n0);

    double desired = 0.0, inter = 0.0;
    for (int k = 0; k < 3; ++k) {
      cxd acc(0.0, 0.0);
      for (int i = 0; i < 4; ++i) {
        cxd hx(0.0, 0.0);
        for (int j = 0; j < 8; ++j) hx += h(i, j) * f(j, k);
        acc += std::conj(w(i)) * hx;
      }
      if (k == 1) desired = std::norm(acc);
      else inter += std::norm(acc);
    }
    CHECK(sinr == doctest::Approx(desired / (inter + i_u + n0)).epsilon(1e-9));
  }

  SUBCASE("colinear jammer power strictly decreases eavesdropper SINR") {
    std::mt19937_64 r2(3);
    const geom::ChannelMatrix h_e = los_channel(bs, hn, {25, 10, 0}, 0.0, r2);
    const MatXc f = random_matrix(8, 2);
    const VecXc w = (h_e.entries * f.col(0)).normalized();
    const geom::ChannelMatrix h_j = los_channel(hn, hn, {10, -4, 0}, 0.0, r2);
    const VecXc g_dir = (h_j.entries.adjoint() * w).normalized();
    double prev = 1e300;
    for (double p : {0.0, 0.5, 1.0, 2.0, 4.0}) {
      const double i_e =
          received_jamming_power({h_j.entries}, {VecXc(std::sqrt(p) * g_dir)}, w);
      const double sinr = sinr_stream(h_e.entries, f, 0, w, i_e, 1e-10);
      CHECK(sinr < prev);
      prev = sinr;
    }
  }

  SUBCASE("two-jammer accumulation matches the oracle") {
    const MatXc h1 = random_matrix(4, 4), h2 = random_matrix(4, 4);
    const VecXc g1 = random_matrix(4, 1).col(0), g2 = random_matrix(4, 1).col(0);
    const VecXc w = random_matrix(4, 1).col(0).normalized();
    const double acc = received_jamming_power({h1, h2}, {g1, g2}, w);
    double expect = 0.0;
    for (const auto& [h, g] : {std::pair{h1, g1}, std::pair{h2, g2}}) {
      cxd v(0.0, 0.0);
      for (int i = 0; i < 4; ++i) {
        cxd hx(0.0, 0.0);
        for (int j = 0; j < 4; ++j) hx += h(i, j) * g(j);
        v += std::conj(w(i)) * hx;
      }
      expect += std::norm(v);
    }
    CHECK(acc == doctest::Approx(expect).epsilon(1e-9));
  }

  SUBCASE("common channel scaling multiplies signal terms by c^2") {
    const MatXc h = random_matrix(4, 8);
    const MatXc f = random_matrix(8, 2);
    const VecXc w = (h * f.col(0)).normalized();
    const double c = 3.7;
    const double n0 = 1e-10;
    const double s2 = sinr_stream(MatXc(c * h), f, 0, w, 0.0, n0);
    double desired = 0.0, inter = 0.0;
    for (int k = 0; k < 2; ++k) {
      const double p = std::norm((w.adjoint() * h * f.col(k))(0, 0));
      if (k == 0) desired = p;
      else inter = p;
    }
    const double expect = c * c * desired / (c * c * inter + n0);
    CHECK(s2 == doctest::Approx(expect).epsilon(1e-9));
  }

  CHECK_THROWS_AS(
      sinr_stream(random_matrix(2, 2), random_matrix(2, 1), 0, random_matrix(2, 1).col(0),
                  0.0, 0.0),
      std::domain_error);
}

TEST_CASE("secrecy rate") {
  CHECK(secrecy_rate(1.0, 1.0) == doctest::Approx(0.0));
  CHECK(secrecy_rate(3.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(secrecy_rate(1.0, 7.0) == doctest::Approx(0.0)); // clamped, not -2

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  for (int i = 0; i < 500; ++i) {
    const double sl = u(rng), se = u(rng), eps = 0.3;
    const double r = secrecy_rate(sl, se);
    CHECK(r >= 0.0);
    CHECK(secrecy_rate(sl + eps, se) >= r);
    CHECK(secrecy_rate(sl, se + eps) <= r);
  }
  CHECK_THROWS_AS(secrecy_rate(-1.0, 0.0), std::domain_error);
}
