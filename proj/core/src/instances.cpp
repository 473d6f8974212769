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

#include "robustpsr/instances.hpp"

#include <array>
#include <cmath>

namespace robustpsr {

namespace {

// ------------------------------------------------------------------
// Three-step sweep family constants.
//
// Reward 1{o_3 = 1}; the truth gives the final observation odds below per
// action cell (a_1, a_2), so the joint-TV robust value of the cell policy
// (radius 0.1, so l1 budget 0.2) is odds - 0.2, a ladder with gaps
// 0.32 / 0.16 / 0.08 / 0 from worst to best.  The behavior policy covers
// cells inversely to their quality.  Suppressor members lower the odds of
// every cell better than a target rung; their likelihood drift against the
// truth is sized so they leave the confidence set around sample sizes
// 200 / 1100 / 4400, which walks the selected policy up the ladder.  The
// remaining members are harmless: raised odds or first-step tilts never
// drag any policy's worst case below the truth's.
// ------------------------------------------------------------------

// cell index = 2 a_1 + a_2
constexpr std::array<double, 4> kTruthOdds = {0.52, 0.68, 0.76, 0.84};
constexpr std::array<double, 4> kSuppressAll = {0.52, 0.45, 0.45, 0.45};
constexpr std::array<double, 4> kSuppressTop2 = {0.52, 0.68, 0.60, 0.60};
constexpr std::array<double, 4> kSuppressTop1 = {0.52, 0.68, 0.76, 0.65};
constexpr std::array<double, 4> kRaisedBig = {0.60, 0.76, 0.84, 0.92};
constexpr std::array<double, 4> kRaisedSmall = {0.56, 0.72, 0.80, 0.88};
constexpr double kFirstStepHigh = 0.60;  // P(o_2 = 0) of one decoy
constexpr double kFirstStepLow = 0.42;   // P(o_2 = 0) of the other
constexpr double kBehaviorA1 = 0.10;     // P(a_1 = 1)
constexpr double kBehaviorA2 = 0.20;     // P(a_2 = 1), either branch
constexpr double kFamilyRadius = 0.1;

Dims family_dims() { return Dims{3, 2, 2}; }

/// Truth-like family member: first-step rows (p0, 1 - p0) everywhere,
/// second-step rows (1 - odds[cell], odds[cell]).
TabularModel family_member(const std::array<double, 4>& odds, double p0) {
  Dims d = family_dims();
  std::vector<std::vector<double>> tables(2);
  tables[0].resize(d.history_count(1) * d.num_obs);
  for (long t = 0; t < d.history_count(1); ++t) {
    tables[0][t * 2] = p0;
    tables[0][t * 2 + 1] = 1.0 - p0;
  }
  tables[1].resize(d.history_count(2) * d.num_obs);
  for (long t = 0; t < d.history_count(2); ++t) {
    int a2 = static_cast<int>(t % d.num_actions);
    int a1 = static_cast<int>((t / (d.num_actions * d.num_obs)) %
                              d.num_actions);
    double q = odds[2 * a1 + a2];
    tables[1][t * 2] = 1.0 - q;
    tables[1][t * 2 + 1] = q;
  }
  return TabularModel(d, 0, std::move(tables));
}

std::vector<double> constant_rows(long rows, int width,
                                  std::span<const double> row) {
  std::vector<double> out(rows * width);
  for (long r = 0; r < rows; ++r)
    for (int c = 0; c < width; ++c) out[r * width + c] = row[c];
  return out;
}

}  // namespace

Dims ring2_dims() { return Dims{2, 2, 2}; }

TabularModel ring2_model() {
  // rows by tau_1 = (o_1, a_1) rank: (0,0), (0,1), (1,0), (1,1)
  return TabularModel(ring2_dims(), 0,
                      {{0.3, 0.7, 0.2, 0.8, 0.5, 0.5, 0.5, 0.5}});
}

TabularModel ring2_variant() {
  return TabularModel(ring2_dims(), 0,
                      {{0.3, 0.7, 0.3, 0.7, 0.5, 0.5, 0.5, 0.5}});
}

Policy ring2_constant(int action) {
  return constant_policy(ring2_dims(), {action, action});
}

Policy ring2_uniform() { return uniform_policy(ring2_dims()); }

RewardSpec ring2_reward() {
  Dims d = ring2_dims();
  std::vector<double> values(d.history_count(2), 0.0);
  for (long t = 0; t < static_cast<long>(values.size()); ++t)
    values[t] = ((t / d.num_actions) % d.num_obs == 1) ? 1.0 : 0.0;
  return RewardSpec(d, std::move(values));
}

ModelClass ring2_class() {
  Dims d = ring2_dims();
  TabularModel flat(d, 0, {constant_rows(d.history_count(1), d.num_obs,
                                         std::array<double, 2>{0.5, 0.5})});
  return ModelClass({ring2_model(), std::move(flat)},
                    CoreTests::complete_short_tests(d), 0);
}

ExperimentInstance ring2_family() {
  Dims d = family_dims();

  std::vector<TabularModel> models;
  models.push_back(family_member(kTruthOdds, 0.5));
  models.push_back(family_member(kSuppressAll, 0.5));
  models.push_back(family_member(kSuppressTop2, 0.5));
  models.push_back(family_member(kSuppressTop1, 0.5));
  models.push_back(family_member(kRaisedBig, 0.5));
  models.push_back(family_member(kTruthOdds, kFirstStepHigh));
  models.push_back(family_member(kTruthOdds, kFirstStepLow));
  models.push_back(family_member(kRaisedSmall, 0.5));
  ModelClass cls(std::move(models), CoreTests::complete_short_tests(d), 0);

  std::vector<std::vector<double>> behavior_tables(3);
  behavior_tables[0] = constant_rows(
      d.infoset_count(1), d.num_actions,
      std::array<double, 2>{1.0 - kBehaviorA1, kBehaviorA1});
  behavior_tables[1] = constant_rows(
      d.infoset_count(2), d.num_actions,
      std::array<double, 2>{1.0 - kBehaviorA2, kBehaviorA2});
  behavior_tables[2] = constant_rows(d.infoset_count(3), d.num_actions,
                                     std::array<double, 2>{0.5, 0.5});
  Policy behavior(d, std::move(behavior_tables));

  std::vector<Policy> policies;
  for (int a1 = 0; a1 < 2; ++a1)
    for (int a2 = 0; a2 < 2; ++a2)
      policies.push_back(constant_policy(d, {a1, a2, 1}));

  std::vector<double> values(d.history_count(3), 0.0);
  for (long t = 0; t < static_cast<long>(values.size()); ++t)
    values[t] = ((t / d.num_actions) % d.num_obs == 1) ? 1.0 : 0.0;
  RewardSpec reward(d, std::move(values));

  return ExperimentInstance{std::move(cls), std::move(behavior),
                            std::move(policies), std::move(reward),
                            UncertaintySpec{SetKind::kP, Divergence::kTV,
                                            kFamilyRadius}};
}

TabularModel random_model(const Dims& dims, std::uint64_t seed, double floor) {
  dims.validate();
  if (floor < 0.0 || floor > 1.0) fail("shape", "floor outside [0, 1]");
  Rng rng(seed);
  std::vector<std::vector<double>> tables(dims.horizon - 1);
  for (int h = 1; h < dims.horizon; ++h) {
    long rows = dims.history_count(h);
    tables[h - 1].resize(rows * dims.num_obs);
    for (long t = 0; t < rows; ++t) {
      double total = 0.0;
      std::vector<double> raw(dims.num_obs);
      for (int o = 0; o < dims.num_obs; ++o) {
        raw[o] = -std::log(1.0 - rng.uniform());
        total += raw[o];
      }
      for (int o = 0; o < dims.num_obs; ++o)
        tables[h - 1][t * dims.num_obs + o] =
            floor / dims.num_obs + (1.0 - floor) * raw[o] / total;
    }
  }
  int o1 = static_cast<int>(rng.next_u64() % dims.num_obs);
  return TabularModel(dims, o1, std::move(tables));
}

Policy random_policy(const Dims& dims, std::uint64_t seed, double floor) {
  dims.validate();
  if (floor < 0.0 || floor > 1.0) fail("shape", "floor outside [0, 1]");
  Rng rng(seed);
  std::vector<std::vector<double>> tables(dims.horizon);
  for (int h = 1; h <= dims.horizon; ++h) {
    long rows = dims.infoset_count(h);
    tables[h - 1].resize(rows * dims.num_actions);
    for (long x = 0; x < rows; ++x) {
      double total = 0.0;
      std::vector<double> raw(dims.num_actions);
      for (int a = 0; a < dims.num_actions; ++a) {
        raw[a] = -std::log(1.0 - rng.uniform());
        total += raw[a];
      }
      for (int a = 0; a < dims.num_actions; ++a)
        tables[h - 1][x * dims.num_actions + a] =
            floor / dims.num_actions + (1.0 - floor) * raw[a] / total;
    }
  }
  return Policy(dims, std::move(tables));
}

RewardSpec random_reward(const Dims& dims, std::uint64_t seed) {
  dims.validate();
  Rng rng(seed);
  std::vector<double> values(dims.history_count(dims.horizon));
  for (double& v : values) v = rng.uniform();
  return RewardSpec(dims, std::move(values));
}

}  // namespace robustpsr
