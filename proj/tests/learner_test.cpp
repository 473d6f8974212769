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

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "robustpsr/diagnostics.hpp"
#include "robustpsr/instances.hpp"
#include "robustpsr/learner.hpp"
#include "robustpsr/psr.hpp"

using namespace robustpsr;

namespace {

UncertaintySpec t_tv(double xi) {
  return UncertaintySpec{SetKind::kT, Divergence::kTV, xi};
}

UncertaintySpec p_tv(double xi) {
  return UncertaintySpec{SetKind::kP, Divergence::kTV, xi};
}

ModelClass singleton_truth() {
  Dims d = ring2_dims();
  return ModelClass({ring2_model()}, CoreTests::complete_short_tests(d), 0);
}

/// Every-infoset action distribution (p, 1 - p) for two-action dims.
Policy skewed_policy(const Dims& d, double p) {
  std::vector<std::vector<double>> probs(d.horizon);
  for (int h = 1; h <= d.horizon; ++h) {
    probs[h - 1].resize(d.infoset_count(h) * d.num_actions);
    for (long x = 0; x < d.infoset_count(h); ++x) {
      probs[h - 1][x * d.num_actions] = p;
      probs[h - 1][x * d.num_actions + 1] = 1.0 - p;
    }
  }
  return Policy(d, std::move(probs));
}

}  // namespace

TEST_SUITE("learner") {

TEST_CASE("maximum-likelihood fit caches probabilities of the chosen model") {
  ModelClass cls = singleton_truth();
  OfflineDataset data = sample_dataset(ring2_model(), ring2_uniform(), 50, 1);

  MleResult fit = mle_fit(data, cls);
  CHECK(fit.index == 0);
  REQUIRE(fit.losses.size() == 1);
  CHECK(std::isfinite(fit.losses[0]));
  CHECK(fit.losses[0] > 0.0);

  REQUIRE(fit.fitted_probs.size() == 50);
  double nll = 0.0;
  for (long i = 0; i < data.size(); ++i) {
    double p = traj_prob_policy(ring2_model(), data.behavior,
                                data.trajectories[i]);
    CHECK(fit.fitted_probs[i] == doctest::Approx(p).epsilon(1e-14));
    nll -= std::log(p);
  }
  CHECK(fit.losses[0] == doctest::Approx(nll / 50.0).epsilon(1e-12));
}

TEST_CASE("maximum-likelihood fit recovers the generating member") {
  // Truth emits o_2 = 1 with probability 0.75 under uniform actions; the
  // rival member is flat 0.5, so 500 samples separate them decisively.
  ModelClass cls = ring2_class();
  int hits = 0;
  for (int seed = 0; seed < 100; ++seed) {
    OfflineDataset data =
        sample_dataset(ring2_model(), ring2_uniform(), 500, 100 + seed);
    if (mle_fit(data, cls).index == 0) ++hits;
  }
  CHECK(hits >= 95);
}

TEST_CASE("fit selection ignores class order and the behavior factor") {
  Dims d = ring2_dims();
  CoreTests tests = CoreTests::complete_short_tests(d);
  TabularModel truth = ring2_model();
  TabularModel flat(d, 0, {{0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}});
  OfflineDataset data = sample_dataset(truth, ring2_uniform(), 200, 7);

  ModelClass forward({truth, flat}, tests, 0);
  ModelClass reversed({flat, truth}, tests, 0);
  MleResult a = mle_fit(data, forward);
  MleResult b = mle_fit(data, reversed);
  CHECK(a.index == 0);
  CHECK(b.index == 1);
  CHECK(a.losses[0] == doctest::Approx(b.losses[1]).epsilon(1e-12));
  CHECK(a.losses[1] == doctest::Approx(b.losses[0]).epsilon(1e-12));

  // Same trajectories logged under a different (positive) behavior: every
  // loss shifts by the same policy log-likelihood constant, so the argmin
  // and the loss gaps are unchanged.
  OfflineDataset relabeled(data.trajectories, skewed_policy(d, 0.7));
  MleResult c = mle_fit(relabeled, forward);
  CHECK(c.index == a.index);
  double shift = c.losses[0] - a.losses[0];
  CHECK(c.losses[1] - a.losses[1] == doctest::Approx(shift).epsilon(1e-9));
}

TEST_CASE("fit rejects a class incompatible with the data") {
  Dims d = ring2_dims();
  // Every step-1 row forces o_2 = 0, but the dataset saw o_2 = 1.
  TabularModel stubborn(d, 0, {{1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0}});
  ModelClass cls({stubborn}, CoreTests::complete_short_tests(d), 0);
  OfflineDataset data({Trajectory{{0, 1}, {0, 0}}}, ring2_uniform());
  try {
    mle_fit(data, cls);
    FAIL("expected an incompatibility error");
  } catch (const Error& e) {
    CHECK(e.code() == "class-incompatible");
  }
}

TEST_CASE("default retention threshold") {
  Dims d = ring2_dims();
  // delta / (N * (|O||A|)^(2H)) with |O||A| = 4 and H = 2.
  CHECK(default_p_min(d, 1000, 0.1) ==
        doctest::Approx(0.1 / (1000.0 * 256.0)).epsilon(1e-15));
  CHECK_THROWS_AS(default_p_min(d, 0, 0.1), Error);
  CHECK_THROWS_AS(default_p_min(d, 100, 0.0), Error);
}

TEST_CASE("distillation thresholds by cached probability and splits evenly") {
  OfflineDataset data = sample_dataset(ring2_model(), ring2_uniform(), 101, 2);
  MleResult fit = mle_fit(data, singleton_truth());

  DistilledDataset all = distill(data, fit.fitted_probs, 0.0, 17);
  CHECK_FALSE(all.empty);
  REQUIRE(all.retained.size() == 101);
  for (long i = 0; i < 101; ++i) CHECK(all.retained[i] == i);
  REQUIRE(all.splits.size() == 2);
  long s0 = static_cast<long>(all.splits[0].size());
  long s1 = static_cast<long>(all.splits[1].size());
  CHECK(std::abs(s0 - s1) <= 1);
  std::vector<long> merged;
  for (const auto& part : all.splits)
    merged.insert(merged.end(), part.begin(), part.end());
  std::sort(merged.begin(), merged.end());
  CHECK(merged == all.retained);

  // Same seed reproduces the deal exactly.
  DistilledDataset again = distill(data, fit.fitted_probs, 0.0, 17);
  CHECK(again.splits == all.splits);

  // Threshold keeps exactly the samples at or above it.
  OfflineDataset tiny({Trajectory{{0, 0}, {0, 0}}, Trajectory{{0, 1}, {0, 0}},
                       Trajectory{{0, 1}, {1, 1}}},
                      ring2_uniform());
  std::vector<double> probs = {0.1, 0.2, 0.3};
  DistilledDataset mid = distill(tiny, probs, 0.2, 0);
  CHECK(mid.retained == std::vector<long>{1, 2});

  DistilledDataset none = distill(data, fit.fitted_probs, 1.1, 0);
  CHECK(none.empty);
  CHECK(none.retained.empty());
  for (const auto& part : none.splits) CHECK(part.empty());

  std::vector<double> short_probs = {0.5};
  CHECK_THROWS_AS(distill(data, short_probs, 0.0, 0), Error);
  CHECK_THROWS_AS(distill(tiny, probs, -0.1, 0), Error);
}

TEST_CASE("bonus with no retained samples reduces to the ridge form") {
  Dims d = ring2_dims();
  CoreTests tests = CoreTests::complete_short_tests(d);
  TabularModel truth = ring2_model();
  OfflineDataset data = sample_dataset(truth, ring2_uniform(), 20, 3);
  MleResult fit = mle_fit(data, singleton_truth());
  DistilledDataset none = distill(data, fit.fitted_probs, 1.1, 0);

  double lambda = 2.0, alpha = 0.01;
  BonusFn bonus(truth, tests, none, data, lambda, alpha);
  CHECK(bonus.skipped() == 0);
  CHECK(bonus.alpha() == alpha);
  CHECK(bonus.lambda() == lambda);
  for (int h = 0; h < d.horizon; ++h) {
    Eigen::MatrixXd expect =
        lambda * Eigen::MatrixXd::Identity(tests.feature_dim(h),
                                           tests.feature_dim(h));
    CHECK((bonus.moment(h) - expect).cwiseAbs().maxCoeff() <= 1e-15);
  }

  std::vector<int> obs = {0, 1}, acts = {0, 1};
  double acc = 0.0;
  for (int h = 0; h < d.horizon; ++h) {
    Eigen::VectorXd psi = prediction_feature(truth, tests, obs, acts, h);
    acc += psi.squaredNorm() / lambda;
  }
  CHECK(bonus(Trajectory{obs, acts}) ==
        doctest::Approx(std::min(alpha * std::sqrt(acc), 1.0)).epsilon(1e-12));
}

TEST_CASE("bonus accumulates split moments and stays in the unit range") {
  Dims d = ring2_dims();
  CoreTests tests = CoreTests::complete_short_tests(d);
  TabularModel truth = ring2_model();
  OfflineDataset data = sample_dataset(truth, ring2_uniform(), 100, 4);
  MleResult fit = mle_fit(data, singleton_truth());
  DistilledDataset distilled = distill(data, fit.fitted_probs, 0.0, 5);

  double lambda = 1.0, alpha = 0.5;
  BonusFn bonus(truth, tests, distilled, data, lambda, alpha);
  CHECK(bonus.skipped() == 0);

  // Moments match a direct recomputation from the splits.
  for (int h = 0; h < d.horizon; ++h) {
    Eigen::MatrixXd expect =
        lambda * Eigen::MatrixXd::Identity(tests.feature_dim(h),
                                           tests.feature_dim(h));
    for (long i : distilled.splits[h]) {
      const Trajectory& traj = data.trajectories[i];
      Eigen::VectorXd psi =
          prediction_feature(truth, tests, traj.obs, traj.acts, h);
      expect += psi * psi.transpose();
    }
    CHECK((bonus.moment(h) - expect).cwiseAbs().maxCoeff() <= 1e-10);
  }

  // Dense table agrees with direct evaluation and stays inside [0, 1].
  std::vector<double> table = bonus.table();
  REQUIRE(table.size() == static_cast<std::size_t>(d.history_count(2)));
  std::vector<int> obs, acts;
  for (long t = 0; t < d.history_count(2); ++t) {
    unrank_history(d, 2, t, obs, acts);
    CHECK(table[t] == bonus(obs, acts));
    CHECK(table[t] >= 0.0);
    CHECK(table[t] <= 1.0);
  }
  CHECK(table[0] > 0.0);

  // Quadratic-form consistency against an explicit inverse.
  std::vector<int> probe_obs = {0, 0}, probe_acts = {1, 0};
  double acc = 0.0;
  long rank = 0;
  for (int h = 0; h < d.horizon; ++h) {
    Eigen::VectorXd psi =
        prediction_feature(truth, tests, probe_obs, probe_acts, h);
    acc += psi.dot(bonus.moment(h).ldlt().solve(psi));
    if (h + 1 < d.horizon)
      rank = extend_history(d, rank, probe_obs[h], probe_acts[h]);
  }
  CHECK(bonus(probe_obs, probe_acts) ==
        doctest::Approx(std::min(alpha * std::sqrt(acc), 1.0)).epsilon(1e-10));
}

TEST_CASE("bonus saturates on unreachable prefixes and counts skips") {
  Dims d = ring2_dims();
  CoreTests tests = CoreTests::complete_short_tests(d);
  TabularModel truth = ring2_model();
  // Both trajectories open with o_1 = 1, which the model never emits.
  OfflineDataset data(
      {Trajectory{{1, 0}, {0, 0}}, Trajectory{{1, 1}, {0, 0}}},
      ring2_uniform());
  std::vector<double> probs = {1.0, 1.0};
  DistilledDataset distilled = distill(data, probs, 0.0, 0);
  REQUIRE(distilled.retained.size() == 2);

  BonusFn bonus(truth, tests, distilled, data, 1.0, 0.25);
  // The sample dealt to the depth-1 split has an unreachable prefix; the
  // one dealt to depth 0 contributes the (reachable) empty history.
  CHECK(bonus.skipped() == 1);
  CHECK(bonus(data.trajectories[0]) == 1.0);
  CHECK(bonus(data.trajectories[1]) == 1.0);

  // With a zero scale the bonus vanishes exactly on reachable trajectories
  // and still saturates on unreachable ones.
  BonusFn flat_bonus(truth, tests, distilled, data, 1.0, 0.0);
  std::vector<double> table = flat_bonus.table();
  std::vector<int> obs, acts;
  for (long t = 0; t < d.history_count(2); ++t) {
    unrank_history(d, 2, t, obs, acts);
    CHECK(table[t] == (obs[0] == 1 ? 1.0 : 0.0));
  }

  CHECK_THROWS_AS(BonusFn(truth, tests, distilled, data, 0.0, 1.0), Error);
  CHECK_THROWS_AS(BonusFn(truth, tests, distilled, data, 1.0, -1.0), Error);
  CHECK_THROWS_AS(BonusFn(truth, tests, DistilledDataset{}, data, 1.0, 1.0),
                  Error);
  std::vector<int> empty;
  CHECK_THROWS_AS(bonus(std::span<const int>(empty),
                        std::span<const int>(empty)),
                  Error);
}

TEST_CASE("behavior floor over core action sequences") {
  CoreTests tests = CoreTests::complete_short_tests(ring2_dims());
  // Uniform actions: the worst core sequence is a length-2 run, 0.5 * 0.5.
  CHECK(min_core_action_prob(ring2_uniform(), tests) ==
        doctest::Approx(0.25).epsilon(1e-15));
  // A deterministic behavior zeroes every sequence using the other action.
  CHECK(min_core_action_prob(ring2_constant(0), tests) == 0.0);
  CHECK_THROWS_AS(min_core_action_prob(uniform_policy(Dims{3, 2, 2}), tests),
                  Error);
}

TEST_CASE("penalized learner reduces to nominal planning without pessimism") {
  ModelClass cls = singleton_truth();
  OfflineDataset data = sample_dataset(ring2_model(), ring2_uniform(), 200, 11);
  std::vector<Policy> policies = {ring2_constant(0), ring2_constant(1),
                                  ring2_uniform()};
  LearnerParams params;
  params.alpha = 0.0;
  params.lambda = 1.0;
  params.p_min = 0.0;

  Alg1Result out = algorithm1(data, cls, policies, ring2_reward(), p_tv(0.0),
                              params);
  CHECK(out.policy_index == 1);
  CHECK(out.alpha == 0.0);
  CHECK(out.lambda == 1.0);
  CHECK(out.p_min == 0.0);
  CHECK(out.scale == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(out.distilled.retained.size() == 200);

  std::vector<double> nominal = {0.7, 0.8, 0.75};
  REQUIRE(out.robust_values.size() == 3);
  for (int p = 0; p < 3; ++p) {
    CHECK(out.robust_values[p] == doctest::Approx(nominal[p]).epsilon(1e-9));
    CHECK(std::abs(out.bonus_values[p]) <= 1e-15);
    CHECK(out.objectives[p] ==
          doctest::Approx(out.robust_values[p]).epsilon(1e-12));
  }
}

TEST_CASE("penalized learner resolves documented defaults") {
  ModelClass cls = singleton_truth();
  OfflineDataset data = sample_dataset(ring2_model(), ring2_uniform(), 200, 11);
  std::vector<Policy> policies = {ring2_constant(0), ring2_constant(1)};
  UncertaintySpec spec = t_tv(0.1);

  Alg1Result out =
      algorithm1(data, cls, policies, ring2_reward(), spec, LearnerParams{});

  Dims d = ring2_dims();
  long q_a = 4;  // four length-2 action sequences at the root level
  CHECK(out.lambda == doctest::Approx(d.horizon * d.horizon * q_a * q_a)
                          .epsilon(1e-15));
  CHECK(out.p_min ==
        doctest::Approx(default_p_min(d, data.size(), 0.1)).epsilon(1e-15));

  double gamma = 1.0 / gamma_condition(ring2_model(), cls.tests);
  double iota = min_core_action_prob(data.behavior, cls.tests);
  double beta = std::log(static_cast<double>(cls.size()) / 0.1);
  double dim = static_cast<double>(cls.tests.max_dim());
  double expect_alpha =
      q_a * std::sqrt(dim * d.horizon) / (gamma * gamma) *
          std::sqrt(out.lambda) +
      std::sqrt(beta) / (iota * gamma);
  CHECK(out.alpha == doctest::Approx(expect_alpha).epsilon(1e-9));

  // Rectangular total-variation pessimism scales by the exact wellness
  // constant of the fitted model.
  CHECK(out.scale ==
        doctest::Approx(wellness_cb_exact_t(ring2_model(), spec))
            .epsilon(1e-12));

  // The default scale needs behavior coverage of every core sequence.  The
  // log only ever takes action 0, so its fit succeeds but the coverage floor
  // over core action sequences is zero.
  OfflineDataset uncovered(
      {Trajectory{{0, 0}, {0, 0}}, Trajectory{{0, 1}, {0, 0}}},
      skewed_policy(d, 1.0));
  CHECK_THROWS_AS(algorithm1(uncovered, cls, policies, ring2_reward(), spec,
                             LearnerParams{}),
                  Error);
}

TEST_CASE("penalized learner prefers the higher-value arm with enough data") {
  ModelClass cls = ring2_class();
  std::vector<Policy> policies = {ring2_constant(0), ring2_constant(1)};
  LearnerParams params;
  params.alpha = 0.2;
  params.lambda = 1.0;

  int hits = 0;
  for (int seed = 0; seed < 50; ++seed) {
    OfflineDataset data =
        sample_dataset(ring2_model(), ring2_uniform(), 2000, 1000 + seed);
    Alg1Result out = algorithm1(data, cls, policies, ring2_reward(), t_tv(0.1),
                                params);
    if (out.policy_index == 1) ++hits;
  }
  CHECK(hits >= 45);
}

TEST_CASE("penalized learner is stable under policy reordering and ties") {
  ModelClass cls = singleton_truth();
  OfflineDataset data = sample_dataset(ring2_model(), ring2_uniform(), 300, 21);
  LearnerParams params;
  params.alpha = 0.1;
  params.lambda = 1.0;

  std::vector<Policy> forward = {ring2_constant(0), ring2_constant(1)};
  std::vector<Policy> reversed = {ring2_constant(1), ring2_constant(0)};
  Alg1Result a = algorithm1(data, cls, forward, ring2_reward(), t_tv(0.1),
                            params);
  Alg1Result b = algorithm1(data, cls, reversed, ring2_reward(), t_tv(0.1),
                            params);
  CHECK(a.policy_index == 1);
  CHECK(b.policy_index == 0);
  CHECK(a.objectives[0] == doctest::Approx(b.objectives[1]).epsilon(1e-12));
  CHECK(a.objectives[1] == doctest::Approx(b.objectives[0]).epsilon(1e-12));

  // An exact tie breaks to the lowest index.
  std::vector<Policy> twice = {ring2_constant(1), ring2_constant(1)};
  CHECK(algorithm1(data, cls, twice, ring2_reward(), t_tv(0.1), params)
            .policy_index == 0);

  std::vector<Policy> empty;
  CHECK_THROWS_AS(algorithm1(data, cls, empty, ring2_reward(), t_tv(0.1),
                             params),
                  Error);
}

TEST_CASE("likelihood confidence set contains the fit and grows with width") {
  ModelClass cls = ring2_class();
  OfflineDataset data = sample_dataset(ring2_model(), ring2_uniform(), 300, 13);
  MleResult fit = mle_fit(data, cls);

  std::vector<long> tight = confidence_set(data, cls, 0.0);
  std::vector<long> mid = confidence_set(data, cls, 0.5);
  std::vector<long> all = confidence_set(data, cls, 1e9);
  CHECK(std::find(tight.begin(), tight.end(), fit.index) != tight.end());
  for (long j : tight)
    CHECK(std::find(mid.begin(), mid.end(), j) != mid.end());
  for (long j : mid) CHECK(std::find(all.begin(), all.end(), j) != all.end());
  CHECK(all == std::vector<long>{0, 1});

  CHECK_THROWS_AS(confidence_set(data, cls, -0.5), Error);
}

TEST_CASE("likelihood confidence set retains the generator") {
  ModelClass cls = ring2_class();
  double beta = std::log(2.0 / 0.1);
  int hits = 0;
  for (int seed = 0; seed < 20; ++seed) {
    OfflineDataset data =
        sample_dataset(ring2_model(), ring2_uniform(), 500, 400 + seed);
    std::vector<long> members = confidence_set(data, cls, beta);
    if (std::find(members.begin(), members.end(), 0L) != members.end())
      ++hits;
  }
  CHECK(hits >= 18);
}

TEST_CASE("double pessimism reports per-member values and breaks ties low") {
  std::vector<Policy> policies = {ring2_constant(0), ring2_constant(1)};
  UncertaintySpec spec = t_tv(0.1);
  OfflineDataset data = sample_dataset(ring2_model(), ring2_uniform(), 200, 31);

  // Singleton class: the set is forced and the learner is plain robust
  // planning under the only member.
  ModelClass solo = singleton_truth();
  Alg2Result out = algorithm2(data, solo, policies, ring2_reward(), spec);
  CHECK(out.confidence == std::vector<long>{0});
  REQUIRE(out.member_values.size() == 2);
  for (int p = 0; p < 2; ++p) {
    REQUIRE(out.member_values[p].size() == 1);
    double direct =
        robust_value(ring2_model(), policies[p], ring2_reward(), spec,
                     planning_options())
            .value;
    CHECK(out.member_values[p][0] == doctest::Approx(direct).epsilon(1e-12));
    CHECK(out.objectives[p] ==
          doctest::Approx(out.member_values[p][0]).epsilon(1e-15));
  }
  CHECK(out.objectives[0] == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(out.objectives[1] == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(out.policy_index == 1);

  // A width large enough to admit the flat member makes both arms equally
  // bad in the worst case, and the tie resolves to the lower index.
  ModelClass both = ring2_class();
  Alg2Result wide =
      algorithm2(data, both, policies, ring2_reward(), spec, 1e9);
  CHECK(wide.confidence == std::vector<long>{0, 1});
  CHECK(wide.objectives[0] == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(wide.objectives[1] == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(wide.policy_index == 0);
  for (int p = 0; p < 2; ++p)
    CHECK(wide.objectives[p] ==
          doctest::Approx(*std::min_element(wide.member_values[p].begin(),
                                            wide.member_values[p].end()))
              .epsilon(1e-15));

  // A negative width selects log(|class| / delta).
  Alg2Result defaulted =
      algorithm2(data, both, policies, ring2_reward(), spec, -1.0, 0.1);
  Alg2Result explicit_beta = algorithm2(data, both, policies, ring2_reward(),
                                        spec, std::log(2.0 / 0.1), 0.1);
  CHECK(defaulted.confidence == explicit_beta.confidence);
  CHECK(defaulted.policy_index == explicit_beta.policy_index);

  std::vector<Policy> empty;
  CHECK_THROWS_AS(algorithm2(data, both, empty, ring2_reward(), spec), Error);
}

}  // TEST_SUITE
