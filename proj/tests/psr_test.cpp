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
#include <vector>

#include "doctest.h"
#include "robustpsr/instances.hpp"
#include "robustpsr/psr.hpp"

namespace {

using namespace robustpsr;

TEST_SUITE("psr") {

TEST_CASE("complete short tests enumerate truncated futures per level") {
  Dims d{3, 2, 2};
  CoreTests tests = CoreTests::complete_short_tests(d);
  CHECK(tests.feature_dim(0) == 16);
  CHECK(tests.feature_dim(1) == 16);
  CHECK(tests.feature_dim(2) == 4);
  CHECK(tests.feature_dim(3) == 1);
  CHECK(tests.max_dim() == 16);
  // Deduplicated action parts: A^2 = 4 at depth-2 levels, A at the last.
  CHECK(tests.core_action_seqs(0).size() == 4);
  CHECK(tests.core_action_seqs(2).size() == 2);
  for (int h = 0; h < d.horizon; ++h)
    for (const CoreTest& q : tests.level(h)) {
      CHECK(q.obs.size() == q.acts.size());
      CHECK(static_cast<int>(q.obs.size()) == std::min(d.horizon - h, 2));
    }
}

TEST_CASE("core test validation rejects malformed futures") {
  Dims d{2, 2, 2};
  // Length exceeds the remaining horizon at level 1.
  std::vector<std::vector<CoreTest>> levels(2);
  levels[0] = {CoreTest{{0}, {0}}};
  levels[1] = {CoreTest{{0, 1}, {0, 0}}};
  CHECK_THROWS_AS(CoreTests(d, levels), Error);
  // Observation symbol out of range.
  levels[1] = {CoreTest{{5}, {0}}};
  CHECK_THROWS_AS(CoreTests(d, levels), Error);
  // Empty level.
  levels[1] = {};
  CHECK_THROWS_AS(CoreTests(d, levels), Error);
}

TEST_CASE("dynamics matrix rank on the pinned instance and a chain") {
  // Two distinct reachable rows at step 1.
  DynamicsMatrix dm = dynamics_matrix(ring2_model(), 1);
  CHECK(dm.matrix.rows() == 4);
  CHECK(dm.matrix.cols() == 4);
  CHECK(dm.rank == 2);
  CHECK(dm.matrix(0, 2) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(dm.matrix(1, 2) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(dm.matrix(2, 0) == doctest::Approx(0.0));

  // A deterministic single-action chain collapses to rank one.
  Dims d{2, 2, 1};
  TabularModel chain(d, 0, {{0.0, 1.0, 0.5, 0.5}});
  DynamicsMatrix cm = dynamics_matrix(chain, 1);
  CHECK(cm.rank == 1);
}

TEST_CASE("dynamics matrix rows marginalize to the history probability") {
  TabularModel m = ring2_model();
  DynamicsMatrix dm = dynamics_matrix(m, 1);
  Dims d = m.dims();
  std::vector<int> obs, acts;
  for (long r = 0; r < d.history_count(1); ++r) {
    unrank_history(d, 1, r, obs, acts);
    double hist = history_obs_prob(m, obs, acts, 1);
    // Fix the future action a_2 = 0 and sum over future observations.
    double total = 0.0;
    for (int o2 = 0; o2 < d.num_obs; ++o2)
      total += dm.matrix(r, step_code(d, o2, 0));
    CHECK(total == doctest::Approx(hist).epsilon(1e-12));
  }
}

TEST_CASE("prediction features are conditional test probabilities") {
  TabularModel m = ring2_model();
  CoreTests tests = CoreTests::complete_short_tests(m.dims());
  std::vector<int> obs{0}, acts{1};
  Eigen::VectorXd psi = prediction_feature(m, tests, obs, acts, 1);
  REQUIRE(psi.size() == 4);
  // Tests in rank order (o2, a2): next-observation odds (0.2, 0.8).
  CHECK(psi[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(psi[1] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(psi[2] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(psi[3] == doctest::Approx(0.8).epsilon(1e-12));
  // For each fixed test action the observation outcomes partition.
  CHECK(psi[0] + psi[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(psi[1] + psi[3] == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<int> bad_obs{1};
  CHECK_THROWS_AS(prediction_feature(m, tests, bad_obs, acts, 1), Error);
  try {
    prediction_feature(m, tests, bad_obs, acts, 1);
  } catch (const Error& e) {
    CHECK(e.code() == "unreachable-history");
  }
  // The raw feature of an unreachable history is the zero vector.
  CHECK(raw_feature(m, tests, bad_obs, acts, 1).norm() == doctest::Approx(0.0));
}

TEST_CASE("extraction reproduces raw features through the operator chain") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Dims d{3, 2, 2};
    TabularModel m = random_model(d, seed);
    CoreTests tests = CoreTests::complete_short_tests(d);
    PsrView view = extract_psr(m, tests);
    CHECK(view.max_residual <= 1e-10);
    CHECK(view.psi0.isApprox(raw_feature(m, tests, {}, {}, 0), 1e-10));
    std::vector<int> obs, acts;
    for (int h = 1; h <= d.horizon; ++h)
      for (long r = 0; r < d.history_count(h); ++r) {
        unrank_history(d, h, r, obs, acts);
        Eigen::VectorXd chain = view.feature(obs, acts, h);
        Eigen::VectorXd raw = raw_feature(m, tests, obs, acts, h);
        CHECK((chain - raw).cwiseAbs().maxCoeff() <= 1e-9);
      }
    // Flow property: summing the next-step operators over observations under
    // any fixed action collapses the predictor one level down.
    for (int h = 1; h <= d.horizon; ++h)
      for (int a = 0; a < d.num_actions; ++a) {
        Eigen::VectorXd acc =
            Eigen::VectorXd::Zero(tests.feature_dim(h - 1));
        for (int o = 0; o < d.num_obs; ++o)
          acc += view.m[h - 1][step_code(d, o, a)].transpose() * view.phi[h];
        CHECK((acc - view.phi[h - 1]).cwiseAbs().maxCoeff() <= 1e-9);
      }
  }
}

TEST_CASE("extraction scalar level predicts joint observation probabilities") {
  TabularModel m = ring2_model();
  CoreTests tests = CoreTests::complete_short_tests(m.dims());
  PsrView view = extract_psr(m, tests);
  Dims d = m.dims();
  std::vector<int> obs, acts;
  for (long r = 0; r < d.history_count(d.horizon); ++r) {
    unrank_history(d, d.horizon, r, obs, acts);
    Eigen::VectorXd top = view.feature(obs, acts, d.horizon);
    REQUIRE(top.size() == 1);
    CHECK(top[0] ==
          doctest::Approx(history_obs_prob(m, obs, acts, d.horizon))
              .epsilon(1e-10));
  }
  CHECK(view.level_rank[1] == 2);
}

TEST_CASE("insufficient tests are rejected with a rank diagnostic") {
  Dims d = ring2_dims();
  std::vector<std::vector<CoreTest>> levels(2);
  for (int o1 = 0; o1 < 2; ++o1)
    for (int a1 = 0; a1 < 2; ++a1)
      for (int o2 = 0; o2 < 2; ++o2)
        for (int a2 = 0; a2 < 2; ++a2)
          levels[0].push_back(CoreTest{{o1, o2}, {a1, a2}});
  // One test cannot span the two distinct step-1 rows.
  levels[1] = {CoreTest{{0}, {0}}};
  try {
    extract_psr(ring2_model(), CoreTests(d, levels));
    FAIL("expected a rank-drop error");
  } catch (const Error& e) {
    CHECK(e.code() == "core-tests-insufficient");
  }
}

TEST_CASE("conditioning bound is exactly one for scalar feature families") {
  // Singleton test families give one-dimensional features; the operators are
  // all exactly 1 for a single-observation model, so the backward pass yields
  // 1 at every level.
  Dims d{2, 1, 2};
  TabularModel m(d, 0, {{1.0, 1.0}});
  std::vector<std::vector<CoreTest>> levels(2);
  levels[0] = {CoreTest{{0}, {0}}};
  levels[1] = {CoreTest{{0}, {0}}};
  CHECK(gamma_condition(m, CoreTests(d, levels)) ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("conditioning bound of the pinned instance") {
  // Derived by hand from the minimum-norm operators.  At step 1 the feature
  // rows are (t0, t0, t1, t1) per next-observation law (t0, t1), so the
  // minimum-norm solution of the top-level regression is (1/2, 1/2, 0, 0) for
  // next observation 0 and (0, 0, 1/2, 1/2) for next observation 1, giving
  // 1/2 on every basis vector; the level-0 pass is strictly smaller.
  CHECK(gamma_condition(ring2_model(),
                        CoreTests::complete_short_tests(ring2_dims())) ==
        doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("normalized feature mass is bounded below via the conditioning") {
  // For any reachable history, x = psi-bar / ||psi-bar||_1 lies in the unit
  // l1 ball and its backward objective is exactly 1 / ||psi-bar||_1, so the
  // vertex maximum dominates it.
  for (std::uint64_t seed = 10; seed <= 12; ++seed) {
    Dims d{3, 2, 2};
    TabularModel m = random_model(d, seed);
    CoreTests tests = CoreTests::complete_short_tests(d);
    double bound = gamma_condition(m, tests);
    std::vector<int> obs, acts;
    for (int h = 0; h < d.horizon; ++h)
      for (long r = 0; r < d.history_count(h); ++r) {
        unrank_history(d, h, r, obs, acts);
        if (history_obs_prob(m, obs, acts, h) <= 0.0) continue;
        Eigen::VectorXd psi_bar = prediction_feature(m, tests, obs, acts, h);
        CHECK(psi_bar.lpNorm<1>() * bound >= 1.0 - 1e-9);
      }
  }
}

TEST_CASE("conditioning bound matches an explicit two-step enumeration") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    Dims d{2, 2, 2};
    TabularModel m = random_model(d, seed + 40);
    CoreTests tests = CoreTests::complete_short_tests(d);
    PsrView view = extract_psr(m, tests);
    double got = gamma_condition(view);
    CHECK(got == doctest::Approx(gamma_condition(m, tests)).epsilon(1e-12));

    // Direct enumeration with per-branch action choices.
    auto last = [&](const Eigen::VectorXd& z) {
      double best = 0.0;
      for (int a2 = 0; a2 < 2; ++a2) {
        double acc = 0.0;
        for (int o2 = 0; o2 < 2; ++o2)
          acc += std::abs(
              (view.phi[2].transpose() * view.m[1][step_code(d, o2, a2)] * z)(
                  0));
        best = std::max(best, acc);
      }
      return best;
    };
    double want = 0.0;
    for (long i = 0; i < tests.feature_dim(1); ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(tests.feature_dim(1));
      e[i] = 1.0;
      want = std::max(want, last(e));
    }
    for (long i = 0; i < tests.feature_dim(0); ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(tests.feature_dim(0));
      e[i] = 1.0;
      for (int a1 = 0; a1 < 2; ++a1) {
        double acc = 0.0;
        for (int o1 = 0; o1 < 2; ++o1)
          acc += last(view.m[0][step_code(d, o1, a1)] * e);
        want = std::max(want, acc);
      }
    }
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
    CHECK(got > 0.0);
  }
}

}  // TEST_SUITE

}  // namespace
