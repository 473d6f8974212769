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

#include "robustpsr/ambiguity.hpp"
#include "robustpsr/lp.hpp"
#include "robustpsr/process.hpp"

namespace robustpsr {

/// Result of a dual maximization.  Which fields are populated depends on the
/// problem; see the individual solvers.
struct DualSolution {
  double value = 0.0;
  /// Scalar multiplier of the per-row duals (breakpoint for TV, temperature
  /// for KL).
  double multiplier = 0.0;
  /// Joint-law TV dual variables: gamma over x_H ranks, lambda over tau_{H-1}
  /// ranks; joint-law KL dual: eta over action-sequence ranks.
  std::vector<double> gamma;
  std::vector<double> lambda;
  std::vector<double> eta;
  long iterations = 0;
  double residual = 0.0;
  /// Maximizer pinned at the lower bracket / degenerate (constant losses).
  bool degenerate = false;
};

/**
 * Worst-case expectation over a total-variation ball (half-l1 radius xi):
 *
 *   inf { E_P[loss] : TV(P, p0) <= xi }
 *    = max_lambda { lambda - E_{p0}[(lambda - loss)_+] - xi max_x (lambda - loss(x))_+ }
 *
 * The objective is piecewise linear and concave in lambda with knots at the
 * loss values, so the maximum is found exactly by evaluating every knot.
 */
DualSolution tv_dual_expectation(std::span<const double> p0,
                                 std::span<const double> loss, double xi);

/**
 * Worst-case expectation over a KL ball:
 *
 *   inf { E_P[loss] : KL(P || p0) <= xi }
 *    = sup_{lambda >= 0} { -lambda log E_{p0}[exp(-loss/lambda)] - lambda xi }
 *
 * Numerically stabilized by shifting the losses by their minimum over p0's
 * support; the lambda -> 0 limit is that minimum.  Solved by golden-section
 * over [1e-8, range/xi + 1] with bracket tolerance `tol`; the objective is
 * concave in lambda.  xi = 0 short-circuits to the nominal expectation.
 */
DualSolution kl_dual_expectation(std::span<const double> p0,
                                 std::span<const double> loss, double xi,
                                 double tol = 1e-10);

/// Budget convention for the joint-law TV problems.  kHalfL1 interprets the
/// radius in the same half-l1 convention as membership (l1 budget 2 xi);
/// kL1 uses the raw l1 budget xi.
enum class TvBudget { kHalfL1, kL1 };

struct PTvOptions {
  TvBudget budget = TvBudget::kHalfL1;
  long iterations = 50'000;
  double step = 0.05;
};

struct PTvPrimalResult {
  double value = 0.0;
  /// Worst joint law over x_H ranks (action-sequence-major; see
  /// terminal_policy_weights); empty when H = 1.
  std::vector<double> worst_law;
  LpSolution lp;
};

/**
 * Exact worst-case value over the joint-law TV ball with flow consistency,
 * solved as a linear program over prefix masses P(x_h) and absolute-deviation
 * slacks:
 *
 *   min  sum_{x_H} P(x_H) f(x_H)
 *   s.t. sum_{o_2} P(x_2) = 1                       for every a_1
 *        sum_{o_{h+1}} P(x_{h+1}) = P(x_h)          for every (x_h, a_h)
 *        |P(x_H) - P*(x_H)| <= s(x_H)
 *        sum_{o_{2:H}} s(x_H) <= budget             per action sequence
 *        P, s >= 0
 *
 * with f(x_H) = prod_{h<H} pi_h(a_h | x_h) * sum_{a_H} pi_H(a_H | x_H) R(tau_H).
 */
PTvPrimalResult p_tv_primal(const TabularModel& model, const Policy& policy,
                            const RewardSpec& reward, double xi,
                            TvBudget budget = TvBudget::kHalfL1);

/**
 * Exact dual of the same linear program, reduced to per-terminal deviation
 * variables nu(x_H) (the multiplier difference of the two absolute-deviation
 * rows).  Eliminating the flow and budget multipliers at their optimum leaves
 *
 *   max_nu  sum_{a_1} W(a_1) - sum_{x_H} P*(x_H) nu(x_H)
 *           - budget * sum_{a_{1:H-1}} max_{o_{2:H}} |nu(x_H)|
 *
 * where W is the pessimistic backward recursion on f + nu over
 * (history, action) pairs:
 *
 *   W(x_{H-1}, a_{H-1}) = min_{o_H} (f + nu)(x_H)
 *   W(x_{h-1}, a_{h-1}) = min_{o_h} sum_{a_h} W(x_h, a_h)
 *
 * Every nu is dual feasible, so each iterate's objective certifies a lower
 * bound on the primal optimum, and the maximum attains it.  Maximized by
 * subgradient ascent with step/sqrt(t) and best-iterate tracking.  `gamma`
 * and `lambda` report the equivalent box-form multipliers
 * gamma = f + nu - W and lambda = -W at the top pair level.
 */
DualSolution p_tv_dual(const TabularModel& model, const Policy& policy,
                       const RewardSpec& reward, double xi,
                       const PTvOptions& options = {});

/**
 * Joint-law KL worst case.  Decomposes over action sequences; for each one
 * maximizes the concave scalar
 *
 *   g(eta) = -eta sum_{x_{H-1}} P*(x_{H-1}) log E_{o_H ~ T_{H-1}}[exp(-f/eta)]
 *            - eta xi
 *
 * over eta >= 0 by golden-section with the same stabilization as the per-row
 * dual.  Returns the summed value and the per-sequence maximizers in `eta`.
 */
DualSolution p_kl_dual(const TabularModel& model, const Policy& policy,
                       const RewardSpec& reward, double xi, double tol = 1e-10);

/// f(x_H) table over x_H ranks, the terminal objective weights shared by the
/// joint-law solvers.  x_H ranks are action-sequence-major:
/// rank = rank(a_{1:H-1}) * O^{H-1} + rank(o_{2:H}), each part step-major with
/// the last step least significant (o_1 is fixed and not encoded).
std::vector<double> terminal_policy_weights(const TabularModel& model,
                                            const Policy& policy,
                                            const RewardSpec& reward);

/// Nominal joint law P*(x_H) over the same rank layout.
std::vector<double> nominal_joint_law(const TabularModel& model);

}  // namespace robustpsr
