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

#include <span>
#include <vector>

#include "robustpsr/psr.hpp"
#include "robustpsr/robust_values.hpp"

namespace robustpsr {

/// Coverage of a target policy by a behavior policy.
struct CoverageReport {
  /// Feature-space coefficient: max over levels of the largest generalized
  /// eigenvalue of the target second-moment matrix against the behavior one.
  double type1 = 0.0;
  /// Sum over steps of the behavior expectation of the squared density ratio.
  double type2 = 0.0;
  /// Pointwise density-ratio bound; always >= type1 when both are finite.
  double pointwise = 0.0;
  std::vector<double> type1_per_level;  ///< levels h = 0..H-1
  std::vector<double> type2_per_step;   ///< steps h = 1..H
};

/**
 * Feature-space coverage coefficient
 *   max_h max_x (x^T E_target[psi_bar psi_bar^T] x)
 *             / (x^T E_behavior[psi_bar psi_bar^T] x),
 * with both second-moment matrices formed by exact enumeration of level-h
 * histories.  The maximum over x is taken on the common range: project onto
 * the eigenvectors of the behavior matrix with eigenvalue > 1e-10 and return
 * +infinity when the target matrix has mass outside that range.
 */
double type1_coeff(const Policy& target, const Policy& behavior,
                   const TabularModel& model, const CoreTests& tests);

/// sum_{h=1}^H E_behavior[(D_target(tau_h) / D_behavior(tau_h))^2] by exact
/// enumeration; +infinity when the target reaches a behavior-null history.
double type2_coeff(const Policy& target, const Policy& behavior,
                   const TabularModel& model);

/// max over levels 0..H-1 and histories of D_target(tau_h) / D_behavior(tau_h)
/// with 0/0 = 1 and positive/0 = +infinity.
double pointwise_ratio_bound(const Policy& target, const Policy& behavior,
                             const TabularModel& model);

/// All three coverage quantities plus per-level breakdowns.
CoverageReport coverage_report(const Policy& target, const Policy& behavior,
                               const TabularModel& model,
                               const CoreTests& tests);

/**
 * Wellness condition number of the ball center: the largest likelihood ratio
 * P_member(tau_h) / P_center(tau_h) over grid members of the ball, prefix
 * lengths h = 1..H, and histories, using dynamics-only probabilities
 * (conditioned on the action sequence).  0/0 counts as 1 and positive/0 as
 * +infinity; the result is >= 1.  A grid enumeration lower-bounds the
 * continuous supremum.
 * errors: "too-large".
 */
double wellness_cb(const TabularModel& center, const UncertaintySpec& spec,
                   const SimplexGrid& grid, long cap = kEnumerationCap);

/**
 * Exact wellness condition number for rectangular balls.  Row perturbations
 * are independent, so the supremum over members of a prefix likelihood ratio
 * is the product over its steps of per-row single-observation suprema:
 *   TV: min(p + xi, 1) / p (+infinity at p = 0 with xi > 0);
 *   KL: t/p for the largest t with t log(t/p) + (1-t) log((1-t)/(1-p)) <= xi
 *       (mass off the row support is forced to stay 0, so p = 0 gives 1).
 * The maximum over prefixes is taken by a forward pass over the history tree.
 * errors: "shape" for joint-law specs.
 */
double wellness_cb_exact_t(const TabularModel& center,
                           const UncertaintySpec& spec);

/// Best robust value among the candidate policies minus the robust value of
/// the chosen one; >= 0 whenever the chosen policy is in the list.
double suboptimality_gap(const Policy& chosen,
                         std::span<const Policy> candidates,
                         const TabularModel& model, const RewardSpec& reward,
                         const UncertaintySpec& spec);

}  // namespace robustpsr
