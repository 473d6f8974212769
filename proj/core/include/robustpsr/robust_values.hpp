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

#include <string>
#include <vector>

#include "robustpsr/ambiguity.hpp"
#include "robustpsr/duals.hpp"

namespace robustpsr {

/// Worst-case value result with solver diagnostics.
struct RobustValueReport {
  double value = 0.0;
  /// "bellman-dual", "p-dual", or "brute-force".
  std::string method;
  /// Rectangular (per-history) path: inner dual multipliers and degeneracy
  /// flags, indexed [h-1][tau_h rank] for h = 1..H-1.
  std::vector<std::vector<double>> inner_multiplier;
  std::vector<std::vector<char>> inner_degenerate;
  /// Rectangular path: intermediate value tables V_h over infoset (x_h)
  /// ranks, indexed [h-1] for h = 1..H.
  std::vector<std::vector<double>> level_values;
  /// Joint-law path: the dual solution (and, for TV, the authoritative
  /// primal plus the |primal - dual| agreement gap).
  DualSolution dual;
  PTvPrimalResult primal;
  double cross_check_gap = 0.0;
};

struct RobustValueOptions {
  /// Run the subgradient dual next to the joint-TV primal and record the
  /// agreement gap.  The primal value is authoritative either way.
  bool cross_check = true;
  PTvOptions tv;
  double kl_tol = 1e-10;
};

/// Options for tight planning loops: authoritative solvers only, no
/// redundant dual cross-check.
inline RobustValueOptions planning_options() {
  RobustValueOptions options;
  options.cross_check = false;
  return options;
}

/**
 * Worst-case value over the rectangular per-history ball, by backward
 * recursion over full histories: the step-H action value is the terminal
 * reward, V_h(x_h) averages the action values under the policy, and
 * Q_h(tau_h) applies the scalar worst-case expectation to the next-step V
 * over the row T_h(.|tau_h).  Exact because the adversary picks each row
 * independently.  Inner multipliers are recorded per history.
 */
RobustValueReport robust_value_t(const TabularModel& model,
                                 const Policy& policy, const RewardSpec& reward,
                                 const UncertaintySpec& spec,
                                 double kl_tol = 1e-10);

/// Worst-case value over the joint-law ball: TV resolves through the exact
/// linear program (plus optional dual cross-check), KL through the
/// per-action-sequence dual.
RobustValueReport robust_value_p(const TabularModel& model,
                                 const Policy& policy, const RewardSpec& reward,
                                 const UncertaintySpec& spec,
                                 const RobustValueOptions& options = {});

/// Dispatch on spec.set.
RobustValueReport robust_value(const TabularModel& model, const Policy& policy,
                               const RewardSpec& reward,
                               const UncertaintySpec& spec,
                               const RobustValueOptions& options = {});

/**
 * Grid oracle.  kT: the same backward recursion with the inner problem
 * replaced by a minimum over grid rows inside each ball (falling back to the
 * grid-rounded row when that ball is empty on the grid).  kP: minimum of the
 * nominal value over enumerate_ball members.
 */
double robust_value_bruteforce(const TabularModel& model, const Policy& policy,
                               const RewardSpec& reward,
                               const UncertaintySpec& spec,
                               const SimplexGrid& grid,
                               long cap = kEnumerationCap);

/// Lower estimates of the inner KL maximizers used by the scaling constants:
/// eta_star is the smallest per-action-sequence maximizer of the joint-law KL
/// dual, lambda_star the smallest per-history inner multiplier of the
/// rectangular KL recursion.  Both floored at 1e-6; `degenerate` marks
/// maximizers pinned at a bracket edge or flat inner problems.
struct EtaLambdaEstimate {
  double eta_star = 0.0;
  double lambda_star = 0.0;
  bool eta_degenerate = false;
  bool lambda_degenerate = false;
};

EtaLambdaEstimate estimate_eta_lambda(const TabularModel& model_hat,
                                      const Policy& policy,
                                      const RewardSpec& reward, double xi);

/// Inputs of the pessimism scaling constants.
struct ScalingInputs {
  double eta_star = 1.0;
  double lambda_star = 1.0;
  double c_b = 1.0;
  double xi = 0.0;
};

/**
 * Scaling constant multiplying the bonus value in the lower confidence bound:
 *   (P, TV) -> 1
 *   (T, TV) -> C_B
 *   (P, KL) -> 3 exp(1/eta_star)
 *   (T, KL) -> C_B max{exp(xi)/xi, lambda_star exp(1/lambda_star)}
 * errors: "undefined-scaling" for (T, KL) at xi = 0.
 */
double scaling_constant(const UncertaintySpec& spec,
                        const ScalingInputs& inputs);

}  // namespace robustpsr
