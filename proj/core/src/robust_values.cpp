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

#include "robustpsr/robust_values.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace robustpsr {

namespace {

constexpr double kMultiplierFloor = 1e-6;

void check_shapes(const TabularModel& model, const Policy& policy,
                  const RewardSpec& reward) {
  if (policy.dims() != model.dims() || reward.dims() != model.dims())
    fail("shape", "dimension mismatch");
}

/// V_H(x_H) = sum_a pi_H(a | x_H) R(x_H, a).
std::vector<double> terminal_v(const TabularModel& model, const Policy& policy,
                               const RewardSpec& reward) {
  const Dims& d = model.dims();
  long n = d.infoset_count(d.horizon);
  std::vector<double> v(n, 0.0);
  for (long x = 0; x < n; ++x) {
    double acc = 0.0;
    for (int a = 0; a < d.num_actions; ++a)
      acc += policy.prob(d.horizon, x, a) * reward.at(x * d.num_actions + a);
    v[x] = acc;
  }
  return v;
}

}  // namespace

RobustValueReport robust_value_t(const TabularModel& model,
                                 const Policy& policy, const RewardSpec& reward,
                                 const UncertaintySpec& spec, double kl_tol) {
  check_shapes(model, policy, reward);
  spec.validate();
  if (spec.set != SetKind::kT) fail("shape", "rectangular spec expected");
  const Dims& d = model.dims();

  RobustValueReport out;
  out.method = "bellman-dual";
  out.inner_multiplier.resize(d.horizon - 1);
  out.inner_degenerate.resize(d.horizon - 1);
  out.level_values.resize(d.horizon);

  std::vector<double> v = terminal_v(model, policy, reward);
  out.level_values[d.horizon - 1] = v;
  for (int h = d.horizon - 1; h >= 1; --h) {
    long histories = d.history_count(h);
    out.inner_multiplier[h - 1].assign(histories, 0.0);
    out.inner_degenerate[h - 1].assign(histories, 0);
    // Q_h(tau_h): worst-case expectation of V_{h+1} over the ball around the
    // tau_h transition row; loss[o] = V_{h+1}(x_{h+1} = (tau_h, o)).
    std::vector<double> q(histories, 0.0);
    std::vector<double> loss(d.num_obs, 0.0);
    for (long t = 0; t < histories; ++t) {
      for (int o = 0; o < d.num_obs; ++o) loss[o] = v[t * d.num_obs + o];
      DualSolution inner =
          (spec.div == Divergence::kTV)
              ? tv_dual_expectation(model.transition_row(h, t), loss,
                                    spec.radius)
              : kl_dual_expectation(model.transition_row(h, t), loss,
                                    spec.radius, kl_tol);
      q[t] = inner.value;
      out.inner_multiplier[h - 1][t] = inner.multiplier;
      out.inner_degenerate[h - 1][t] = inner.degenerate ? 1 : 0;
    }
    // V_h(x_h) = sum_a pi_h(a | x_h) Q_h(x_h, a).
    long infosets = d.infoset_count(h);
    std::vector<double> vh(infosets, 0.0);
    for (long x = 0; x < infosets; ++x) {
      double acc = 0.0;
      for (int a = 0; a < d.num_actions; ++a)
        acc += policy.prob(h, x, a) * q[x * d.num_actions + a];
      vh[x] = acc;
    }
    v = std::move(vh);
    out.level_values[h - 1] = v;
  }
  out.value = v[model.initial_obs()];
  return out;
}

RobustValueReport robust_value_p(const TabularModel& model,
                                 const Policy& policy, const RewardSpec& reward,
                                 const UncertaintySpec& spec,
                                 const RobustValueOptions& options) {
  check_shapes(model, policy, reward);
  spec.validate();
  if (spec.set != SetKind::kP) fail("shape", "joint-law spec expected");

  RobustValueReport out;
  out.method = "p-dual";
  if (spec.div == Divergence::kTV) {
    out.primal = p_tv_primal(model, policy, reward, spec.radius,
                             options.tv.budget);
    out.value = out.primal.value;
    if (options.cross_check) {
      out.dual = p_tv_dual(model, policy, reward, spec.radius, options.tv);
      out.cross_check_gap = std::abs(out.dual.value - out.primal.value);
    }
  } else {
    out.dual = p_kl_dual(model, policy, reward, spec.radius, options.kl_tol);
    out.value = out.dual.value;
  }
  return out;
}

RobustValueReport robust_value(const TabularModel& model, const Policy& policy,
                               const RewardSpec& reward,
                               const UncertaintySpec& spec,
                               const RobustValueOptions& options) {
  return spec.set == SetKind::kT
             ? robust_value_t(model, policy, reward, spec, options.kl_tol)
             : robust_value_p(model, policy, reward, spec, options);
}

double robust_value_bruteforce(const TabularModel& model, const Policy& policy,
                               const RewardSpec& reward,
                               const UncertaintySpec& spec,
                               const SimplexGrid& grid, long cap) {
  check_shapes(model, policy, reward);
  spec.validate();
  const Dims& d = model.dims();

  if (spec.set == SetKind::kP) {
    double best = std::numeric_limits<double>::infinity();
    for_each_ball_member(model, spec, grid, cap,
                         [&](const TabularModel& member) {
                           best = std::min(
                               best, value(member, policy, reward, cap));
                         });
    if (!std::isfinite(best)) {
      // Empty grid ball: fall back to the nominal value of the rounded
      // center, mirroring enumerate_ball.
      auto fallback = enumerate_ball(model, spec, grid, cap);
      best = value(fallback.members.front(), policy, reward, cap);
    }
    return best;
  }

  // Rectangular: recursion with the inner dual replaced by a minimum over
  // grid rows in each per-history ball.
  std::vector<double> v = terminal_v(model, policy, reward);
  for (int h = d.horizon - 1; h >= 1; --h) {
    long histories = d.history_count(h);
    std::vector<double> q(histories, 0.0);
    for (long t = 0; t < histories; ++t) {
      auto rows = row_ball(model.transition_row(h, t), spec.div, spec.radius,
                           grid);
      if (rows.empty()) rows.push_back(grid.round(model.transition_row(h, t)));
      double best = std::numeric_limits<double>::infinity();
      for (const auto& row : rows) {
        double acc = 0.0;
        for (int o = 0; o < d.num_obs; ++o)
          acc += row[o] * v[t * d.num_obs + o];
        best = std::min(best, acc);
      }
      q[t] = best;
    }
    long infosets = d.infoset_count(h);
    std::vector<double> vh(infosets, 0.0);
    for (long x = 0; x < infosets; ++x) {
      double acc = 0.0;
      for (int a = 0; a < d.num_actions; ++a)
        acc += policy.prob(h, x, a) * q[x * d.num_actions + a];
      vh[x] = acc;
    }
    v = std::move(vh);
  }
  return v[model.initial_obs()];
}

EtaLambdaEstimate estimate_eta_lambda(const TabularModel& model_hat,
                                      const Policy& policy,
                                      const RewardSpec& reward, double xi) {
  check_shapes(model_hat, policy, reward);
  if (xi <= 0.0) fail("shape", "positive radius required");

  EtaLambdaEstimate out;
  DualSolution joint = p_kl_dual(model_hat, policy, reward, xi);
  double eta = std::numeric_limits<double>::infinity();
  for (double e : joint.eta) eta = std::min(eta, e);
  if (joint.eta.empty()) eta = 0.0;  // H = 1: no inner problem at all
  out.eta_degenerate = joint.degenerate || eta < kMultiplierFloor;
  out.eta_star = std::max(eta, kMultiplierFloor);

  UncertaintySpec tkl{SetKind::kT, Divergence::kKL, xi};
  RobustValueReport rec = robust_value_t(model_hat, policy, reward, tkl);
  double lam = std::numeric_limits<double>::infinity();
  bool degenerate = model_hat.dims().horizon == 1;
  for (std::size_t h = 0; h < rec.inner_multiplier.size(); ++h) {
    for (std::size_t t = 0; t < rec.inner_multiplier[h].size(); ++t) {
      lam = std::min(lam, rec.inner_multiplier[h][t]);
      degenerate = degenerate || rec.inner_degenerate[h][t] != 0;
    }
  }
  if (!std::isfinite(lam)) lam = 0.0;
  out.lambda_degenerate = degenerate || lam < kMultiplierFloor;
  out.lambda_star = std::max(lam, kMultiplierFloor);
  return out;
}

double scaling_constant(const UncertaintySpec& spec,
                        const ScalingInputs& inputs) {
  spec.validate();
  if (inputs.eta_star <= 0.0 || inputs.lambda_star <= 0.0 || inputs.c_b < 1.0)
    fail("shape", "invalid scaling inputs");
  if (spec.set == SetKind::kP)
    return spec.div == Divergence::kTV ? 1.0
                                       : 3.0 * std::exp(1.0 / inputs.eta_star);
  if (spec.div == Divergence::kTV) return inputs.c_b;
  if (inputs.xi <= 0.0)
    fail("undefined-scaling", "rectangular KL scaling needs a positive radius");
  return inputs.c_b * std::max(std::exp(inputs.xi) / inputs.xi,
                               inputs.lambda_star *
                                   std::exp(1.0 / inputs.lambda_star));
}

}  // namespace robustpsr
