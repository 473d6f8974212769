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

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "robustpsr/ambiguity.hpp"
#include "robustpsr/diagnostics.hpp"
#include "robustpsr/duals.hpp"
#include "robustpsr/instances.hpp"
#include "robustpsr/process.hpp"
#include "robustpsr/robust_values.hpp"

namespace robustpsr::testing {

/// Independent oracle for the scalar worst-case expectation: exhaustive
/// minimum of <row, loss> over grid rows inside the divergence ball.
/// Restricting the adversary to the grid can only overestimate the true
/// minimum, by at most O(1/resolution).
inline double grid_min_expectation(std::span<const double> center,
                                   std::span<const double> loss, double xi,
                                   Divergence div, int resolution) {
  SimplexGrid grid(resolution, static_cast<int>(center.size()));
  double best = std::numeric_limits<double>::infinity();
  for (const auto& row : row_ball(center, div, xi, grid)) {
    double v = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) v += row[i] * loss[i];
    best = std::min(best, v);
  }
  return best;
}

/// Independent grid oracle for the two-step joint-law KL worst case.  With
/// two steps the joint conditional law per first action is a single simplex
/// row, so the problem separates: for each a_1, minimize the terminal
/// objective over grid rows with KL(row || T_1(.|tau_1)) <= xi.
inline double pkl_grid_oracle_h2(const TabularModel& model,
                                 const Policy& policy, const RewardSpec& reward,
                                 double xi, int resolution) {
  const Dims& d = model.dims();
  if (d.horizon != 2) fail("shape", "oracle is specific to two steps");
  std::vector<double> f = terminal_policy_weights(model, policy, reward);
  double total = 0.0;
  for (int a1 = 0; a1 < d.num_actions; ++a1) {
    long tau1 = static_cast<long>(model.initial_obs()) * d.num_actions + a1;
    std::span<const double> row = model.transition_row(1, tau1);
    std::vector<double> slice(d.num_obs);
    for (int o2 = 0; o2 < d.num_obs; ++o2)
      slice[o2] = f[static_cast<long>(a1) * d.num_obs + o2];
    double best = std::numeric_limits<double>::infinity();
    SimplexGrid grid(resolution, d.num_obs);
    for (const auto& q : row_ball(row, Divergence::kKL, xi, grid)) {
      double v = 0.0;
      for (int o2 = 0; o2 < d.num_obs; ++o2) v += q[o2] * slice[o2];
      best = std::min(best, v);
    }
    if (!std::isfinite(best)) {
      // Empty grid ball (off-grid center, tiny radius): fall back to the
      // nominal row, an upper bound on the restricted minimum.
      best = 0.0;
      for (int o2 = 0; o2 < d.num_obs; ++o2) best += row[o2] * slice[o2];
    }
    total += best;
  }
  return total;
}

/// Smallest inner KL temperature across the two "crossed" rectangular
/// problems: evaluate model u's backward value tables against model w's rows
/// (and vice versa) and keep the smallest golden-section maximizer, floored
/// at 1e-6.  Smaller temperatures only enlarge the Lipschitz factor below, so
/// the floor and the min over all histories are conservative.
inline double crossed_lambda_star(const TabularModel& a, const TabularModel& b,
                                  const Policy& policy,
                                  const RewardSpec& reward, double xi) {
  const Dims& d = a.dims();
  double lam = std::numeric_limits<double>::infinity();
  UncertaintySpec spec{SetKind::kT, Divergence::kKL, xi};
  for (const auto* values : {&a, &b}) {
    const TabularModel& rows = (values == &a) ? b : a;
    RobustValueReport rep = robust_value_t(*values, policy, reward, spec);
    for (int h = 1; h < d.horizon; ++h) {
      const std::vector<double>& next = rep.level_values[h];  // V_{h+1}
      for (long r = 0; r < d.history_count(h); ++r) {
        std::vector<double> loss(d.num_obs);
        for (int o = 0; o < d.num_obs; ++o)
          loss[o] = next[infoset_rank(d, r, o)];
        DualSolution inner =
            kl_dual_expectation(rows.transition_row(h, r), loss, xi);
        lam = std::min(lam, inner.multiplier);
      }
    }
  }
  return std::max(lam, 1e-6);
}

/// Lipschitz bound on the robust-value difference of two models in terms of
/// the l1 distance of their trajectory laws under the evaluated policy.
inline double simulation_bound(const TabularModel& a, const TabularModel& b,
                               const Policy& policy, const RewardSpec& reward,
                               const UncertaintySpec& spec) {
  double l1 = l1_model_distance(a, b, policy);
  if (spec.set == SetKind::kP && spec.div == Divergence::kTV) return l1;
  if (spec.set == SetKind::kP) {
    double eta =
        std::min(estimate_eta_lambda(a, policy, reward, spec.radius).eta_star,
                 estimate_eta_lambda(b, policy, reward, spec.radius).eta_star);
    return 3.0 * std::exp(1.0 / eta) * l1;
  }
  double cb = std::max(wellness_cb_exact_t(a, spec), wellness_cb_exact_t(b, spec));
  if (spec.div == Divergence::kTV) return 2.0 * cb * l1;
  double lam = crossed_lambda_star(a, b, policy, reward, spec.radius);
  double factor = std::max(std::exp(spec.radius) / spec.radius,
                           lam * std::exp(1.0 / lam));
  return 2.0 * cb * factor * l1;
}

}  // namespace robustpsr::testing
