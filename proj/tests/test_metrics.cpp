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

#include <algorithm>
#include <random>

#include "nfisac/metrics.hpp"

using namespace nfisac::metrics;

TEST_CASE("outage") {
  SUBCASE("all above threshold") {
    const OutageResult r = outage({1.5, 2.0, 3.0}, 1.0);
    CHECK(r.fraction == doctest::Approx(0.0));
  }
  SUBCASE("all below threshold") {
    const OutageResult r = outage({0.1, 0.2}, 1.0);
    CHECK(r.fraction == doctest::Approx(1.0));
  }
  SUBCASE("hand-counted mixed case") {
    const OutageResult r = outage({0.5, 1.5, 2.0, 0.2}, 1.0);
    REQUIRE(r.indicators.size() == 4);
    CHECK(r.indicators[0] == 1);
    CHECK(r.indicators[1] == 0);
    CHECK(r.indicators[2] == 0);
    CHECK(r.indicators[3] == 1);
    CHECK(r.fraction == doctest::Approx(0.5));
  }
  SUBCASE("threshold boundary is an outage (strict inequality on the rate)") {
    const OutageResult r = outage({1.0}, 1.0);
    CHECK(r.fraction == doctest::Approx(0.0)); // 1.0 < 1.0 is false
  }
  SUBCASE("invariant under permutation") {
    std::vector<double> v = {0.3, 1.7, 0.9, 2.4, 1.1};
    const double base = outage(v, 1.0).fraction;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
      std::shuffle(v.begin(), v.end(), rng);
      CHECK(outage(v, 1.0).fraction == doctest::Approx(base));
    }
  }
  CHECK_THROWS_AS(outage({}, 1.0), std::invalid_argument);
}

TEST_CASE("power accounting") {
  SUBCASE("ideal amplifier, no jamming or sensing") {
    const PowerBreakdown pb = power_account(12.5, 0.0, 0.0, 1.0);
    CHECK(pb.total_w == doctest::Approx(12.5));
  }
  SUBCASE("38 W radiated at 0.38 efficiency consumes 100 W") {
    const PowerBreakdown pb = power_account(20.0, 10.0, 8.0, 0.38);
    CHECK(pb.total_w == doctest::Approx(100.0).epsilon(1e-12));
  }
  SUBCASE("linear in each component with slope 1/eta") {
    const double eta = 0.42;
    const PowerBreakdown base = power_account(5.0, 3.0, 2.0, eta);
    CHECK(power_account(6.0, 3.0, 2.0, eta).total_w - base.total_w ==
          doctest::Approx(1.0 / eta).epsilon(1e-12));
    CHECK(power_account(5.0, 4.5, 2.0, eta).total_w - base.total_w ==
          doctest::Approx(1.5 / eta).epsilon(1e-12));
    CHECK(power_account(5.0, 3.0, 2.7, eta).total_w - base.total_w ==
          doctest::Approx(0.7 / eta).epsilon(1e-12));
  }
  CHECK_THROWS_AS(power_account(1.0, 0.0, 0.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(power_account(1.0, 0.0, 0.0, 1.5), std::domain_error);
}

TEST_CASE("aggregation") {
  SlotKpis a;
  a.mean_secrecy = 2.0;
  a.max_secrecy = 4.0;
  a.outage_prob = 0.25;
  a.success_rate = 75.0;
  a.total_power_w = 110.0;

  SUBCASE("single slot: means equal the slot values") {
    const auto stats = aggregate({a});
    CHECK(stats.at("mean_secrecy").mean == doctest::Approx(2.0));
    CHECK(stats.at("max_secrecy").mean == doctest::Approx(4.0));
    CHECK(stats.at("total_power_w").mean == doctest::Approx(110.0));
    CHECK(stats.at("mean_secrecy").stddev == doctest::Approx(0.0));
  }

  SUBCASE("duplicated slot has zero spread") {
    const auto stats = aggregate({a, a});
    CHECK(stats.at("outage").stddev == doctest::Approx(0.0));
    CHECK(stats.at("outage").min == stats.at("outage").max);
  }

  SUBCASE("three hand-written rows") {
    SlotKpis b = a, c = a;
    b.mean_secrecy = 3.0;
    c.mean_secrecy = 7.0;
    const auto stats = aggregate({a, b, c});
    CHECK(stats.at("mean_secrecy").mean == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(stats.at("mean_secrecy").min == doctest::Approx(2.0));
    CHECK(stats.at("mean_secrecy").max == doctest::Approx(7.0));
    // population stddev of {2,3,7} = sqrt(14/3)
    CHECK(stats.at("mean_secrecy").stddev ==
          doctest::Approx(std::sqrt(14.0 / 3.0)).epsilon(1e-12));
  }

  SUBCASE("mean lies within [min, max] for every KPI") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<SlotKpis> rows(25);
    for (auto& k : rows) {
      k.mean_secrecy = u(rng);
      k.max_secrecy = u(rng);
      k.entropy_bits = u(rng);
      k.total_power_w = u(rng);
      k.fj_power_w = u(rng);
    }
    for (const auto& [name, st] : aggregate(rows)) {
      CHECK(st.mean >= st.min - 1e-12);
      CHECK(st.mean <= st.max + 1e-12);
    }
  }

  CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
}
