// Copyright 2026 The robustpsr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "robustpsr/ambiguity.hpp"
#include "robustpsr/instances.hpp"

namespace {

using namespace robustpsr;

TEST_SUITE("ambiguity") {

TEST_CASE("f-divergence endpoints and pinned values") {
  std::vector<double> p{0.5, 0.5}, q{0.25, 0.75};
  CHECK(f_divergence(p, p, Divergence::kTV) == doctest::Approx(0.0));
  CHECK(f_divergence(p, p, Divergence::kKL) == doctest::Approx(0.0));
  CHECK(f_divergence(p, q, Divergence::kTV) ==
        doctest::Approx(0.25).epsilon(1e-12));
  // Point mass against a uniform pair: KL = log 2.
  std::vector<double> point{1.0, 0.0};
  CHECK(f_divergence(point, p, Divergence::kKL) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(f_divergence(point, p, Divergence::kTV) ==
        doctest::Approx(0.5).epsilon(1e-12));
  // Mass outside the support blows up KL but not TV.
  std::vector<double> other{0.0, 1.0};
  CHECK(f_divergence(point, other, Divergence::kKL) ==
        std::numeric_limits<double>::infinity());
  CHECK(f_divergence(point, other, Divergence::kTV) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // Zero numerator mass contributes nothing (0 log 0 = 0).
  CHECK(f_divergence(other, q, Divergence::kKL) ==
        doctest::Approx(std::log(1.0 / 0.75)).epsilon(1e-12));
}

TEST_CASE("membership accepts centers and respects the radius") {
  TabularModel m = ring2_model();
  TabularModel v = ring2_variant();
  for (SetKind set : {SetKind::kT, SetKind::kP})
    for (Divergence div : {Divergence::kTV, Divergence::kKL}) {
      CHECK(membership(m, m, UncertaintySpec{set, div, 0.0}));
      CHECK(membership(m, m, UncertaintySpec{set, div, 0.3}));
    }
  // Only one row moved, by TV exactly 0.1: inside at 0.1, outside at 0.05.
  CHECK(membership(v, m, UncertaintySpec{SetKind::kT, Divergence::kTV, 0.1}));
  CHECK_FALSE(
      membership(v, m, UncertaintySpec{SetKind::kT, Divergence::kTV, 0.05}));
  // At radius zero membership is equality of reachable dynamics.
  CHECK_FALSE(
      membership(v, m, UncertaintySpec{SetKind::kT, Divergence::kTV, 0.0}));
  CHECK_FALSE(
      membership(v, m, UncertaintySpec{SetKind::kP, Divergence::kTV, 0.0}));
}

TEST_CASE("joint membership is weaker than rectangular row membership") {
  // The joint laws under the changed row also move by TV 0.1 (the row is
  // reached with probability one), so the joint ball at the same radius
  // contains the variant as well.
  TabularModel m = ring2_model();
  TabularModel v = ring2_variant();
  CHECK(membership(v, m, UncertaintySpec{SetKind::kP, Divergence::kTV, 0.1}));
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Dims d{2, 2, 2};
    TabularModel a = random_model(d, seed);
    TabularModel b = random_model(d, seed + 500);
    TabularModel center(d, a.initial_obs(), b.tables());
    UncertaintySpec t_spec{SetKind::kT, Divergence::kTV, 0.15};
    UncertaintySpec p_spec{SetKind::kP, Divergence::kTV, 0.15};
    if (membership(a, center, t_spec)) CHECK(membership(a, center, p_spec));
  }
}

TEST_CASE("simplex grid has the right cardinality and valid points") {
  SimplexGrid g(4, 3);
  // C(4 + 2, 2) = 15 compositions of 4 into 3 parts.
  CHECK(g.size() == 15);
  long visited = 0;
  g.for_each([&](std::span<const double> p) {
    double total = 0.0;
    for (double x : p) {
      CHECK(x >= -1e-15);
      // Every coordinate is a multiple of 1/4.
      CHECK(std::abs(x * 4.0 - std::round(x * 4.0)) < 1e-12);
      total += x;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    ++visited;
  });
  CHECK(visited == 15);
  CHECK(SimplexGrid(10, 2).size() == 11);
  CHECK(SimplexGrid(3, 4).size() == 20);
}

TEST_CASE("largest-remainder rounding is exact on grid points") {
  SimplexGrid g(10, 3);
  std::vector<double> on{0.2, 0.3, 0.5};
  auto r = g.round(on);
  CHECK(r[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(r[1] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(r[2] == doctest::Approx(0.5).epsilon(1e-12));
  // Off-grid points land on a grid point that still sums to one.
  std::vector<double> off{0.333, 0.333, 0.334};
  auto q = g.round(off);
  double total = 0.0;
  for (double x : q) {
    CHECK(std::abs(x * 10.0 - std::round(x * 10.0)) < 1e-12);
    total += x;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < q.size(); ++i)
    CHECK(std::abs(q[i] - off[i]) <= 0.1 + 1e-12);
}

TEST_CASE("row balls scale with the radius and respect divergences") {
  SimplexGrid g(10, 2);
  std::vector<double> center{0.5, 0.5};
  // TV radius 0.1 on a 1/10 grid: exactly (0.4,0.6), (0.5,0.5), (0.6,0.4).
  auto ball = row_ball(center, Divergence::kTV, 0.1, g);
  CHECK(ball.size() == 3);
  for (const auto& row : ball)
    CHECK(f_divergence(row, center, Divergence::kTV) <= 0.1 + 1e-12);
  // Balls are nested in the radius.
  auto bigger = row_ball(center, Divergence::kTV, 0.3, g);
  CHECK(bigger.size() == 7);
  // Zero radius around an off-grid center is empty.
  std::vector<double> off{0.55, 0.45};
  CHECK(row_ball(off, Divergence::kTV, 0.0, g).empty());
  CHECK(row_ball(off, Divergence::kKL, 0.0, g).empty());
  // Zero KL radius around a grid center is the center alone.
  auto kl0 = row_ball(center, Divergence::kKL, 0.0, g);
  REQUIRE(kl0.size() == 1);
  CHECK(kl0[0][0] == doctest::Approx(0.5));
  // KL balls exclude support-violating rows: a point mass has KL +inf from
  // the interior center, so radius below log(2) keeps both coordinates
  // positive ... and the full simplex edge appears once the radius is huge.
  auto kl = row_ball(center, Divergence::kKL, 0.2, g);
  for (const auto& row : kl)
    CHECK(f_divergence(row, center, Divergence::kKL) <= 0.2 + 1e-12);
  CHECK(row_ball(center, Divergence::kKL, 10.0, g).size() == 11);
}

TEST_CASE("ball enumeration covers the rectangular product") {
  TabularModel m = ring2_model();
  SimplexGrid g(10, 2);
  UncertaintySpec spec{SetKind::kT, Divergence::kTV, 0.1};
  BallEnumeration e = enumerate_ball(m, spec, g);
  CHECK_FALSE(e.rounded_center_fallback);
  // Rows (0.3,0.7), (0.2,0.8), (0.5,0.5), (0.5,0.5): 3 candidates each.
  CHECK(e.members.size() == 81);
  for (const TabularModel& member : e.members)
    CHECK(membership(member, m, spec));
  // Every member's rows sit on the grid.
  for (const TabularModel& member : e.members)
    for (const auto& table : member.tables())
      for (double x : table)
        CHECK(std::abs(x * 10.0 - std::round(x * 10.0)) < 1e-12);
}

TEST_CASE("zero-radius enumeration around a grid center is a singleton") {
  TabularModel m = ring2_model();
  SimplexGrid g(10, 2);
  for (Divergence div : {Divergence::kTV, Divergence::kKL}) {
    BallEnumeration e =
        enumerate_ball(m, UncertaintySpec{SetKind::kT, div, 0.0}, g);
    CHECK_FALSE(e.rounded_center_fallback);
    REQUIRE(e.members.size() == 1);
    CHECK(e.members[0] == m);
  }
}

TEST_CASE("off-grid centers with tiny radii fall back to the rounded center") {
  Dims d{2, 2, 1};
  TabularModel odd(d, 0, {{0.314, 0.686, 0.25, 0.75}});
  SimplexGrid g(4, 2);
  BallEnumeration e =
      enumerate_ball(odd, UncertaintySpec{SetKind::kT, Divergence::kTV, 0.001},
                     g);
  CHECK(e.rounded_center_fallback);
  REQUIRE(e.members.size() == 1);
  // The fallback is the row-rounded center.
  CHECK(e.members[0].transition(1, 0, 0) == doctest::Approx(0.25));
  CHECK(e.members[0].transition(1, 1, 0) == doctest::Approx(0.25));
}

TEST_CASE("joint enumeration filters through joint membership") {
  TabularModel m = ring2_model();
  SimplexGrid g(10, 2);
  UncertaintySpec p_spec{SetKind::kP, Divergence::kTV, 0.1};
  UncertaintySpec t_spec{SetKind::kT, Divergence::kTV, 0.1};
  BallEnumeration e = enumerate_ball(m, p_spec, g);
  CHECK_FALSE(e.rounded_center_fallback);
  CHECK(e.members.size() >= 1);
  for (const TabularModel& member : e.members) {
    CHECK(membership(member, m, p_spec));
  }
  // Rectangular membership implies joint membership on this instance, so the
  // joint ball is at least as large.
  CHECK(e.members.size() >= enumerate_ball(m, t_spec, g).members.size());
}

TEST_CASE("enumeration respects the visit cap") {
  TabularModel m = ring2_model();
  SimplexGrid g(50, 2);
  UncertaintySpec spec{SetKind::kT, Divergence::kTV, 0.5};
  CHECK_THROWS_AS(enumerate_ball(m, spec, g, 100), Error);
  try {
    enumerate_ball(m, spec, g, 100);
  } catch (const Error& e) {
    CHECK(e.code() == "too-large");
  }
}

}  // TEST_SUITE

}  // namespace
