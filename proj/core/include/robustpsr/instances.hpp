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

#pragma once

#include "robustpsr/learner.hpp"

namespace robustpsr {

// Pinned two-step instance used across the test suite: two observations, two
// actions, first observation 0, next-observation rows
//   (0, a=0) -> (0.3, 0.7)   (0, a=1) -> (0.2, 0.8)   (1, .) -> (0.5, 0.5).
Dims ring2_dims();
TabularModel ring2_model();
/// Variant with the (o_1=0, a=1) row moved to (0.3, 0.7); sits exactly on the
/// boundary of the per-row TV ball of radius 0.1.
TabularModel ring2_variant();
/// Deterministic policy playing `action` everywhere.
Policy ring2_constant(int action);
Policy ring2_uniform();
/// Terminal reward 1{o_2 = 1}.
RewardSpec ring2_reward();
/// Two-member hypothesis class {truth, flattened-to-uniform corruption} with
/// complete short core tests.
ModelClass ring2_class();

/// A complete offline experiment instance: hypothesis class (with its
/// designated truth), behavior policy, candidate policies, reward, and
/// uncertainty spec.
struct ExperimentInstance {
  ModelClass cls;
  Policy behavior;
  std::vector<Policy> policies;
  RewardSpec reward;
  UncertaintySpec spec;
};

/**
 * The shipped three-step sweep family.  Four candidate policies commit to an
 * action cell (a_1, a_2); the reward pays 1 on the final observation, whose
 * odds under the truth depend on the cell, giving a strict robust-value
 * ladder with gaps 0.32 / 0.16 / 0.08 / 0.  The behavior
 * policy covers cells inversely to their quality, and the class of eight
 * pairs the truth with members that tilt the final-observation odds of the
 * better cells down at graded detectability, so pessimistic learners climb
 * the ladder as the sample size grows.
 */
ExperimentInstance ring2_family();

/// Random full-support instances for property tests.  Rows mix a fresh draw
/// with the uniform distribution: every entry is at least floor/size.
TabularModel random_model(const Dims& dims, std::uint64_t seed,
                          double floor = 0.1);
Policy random_policy(const Dims& dims, std::uint64_t seed, double floor = 0.1);
RewardSpec random_reward(const Dims& dims, std::uint64_t seed);

}  // namespace robustpsr
