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

#include "robustpsr/diagnostics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace robustpsr {

namespace {

constexpr double kEigCutoff = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_policies(const Policy& target, const Policy& behavior,
                    const TabularModel& model) {
  if (target.dims() != model.dims() || behavior.dims() != model.dims())
    fail("shape", "dimension mismatch");
}

/// Largest generalized eigenvalue of `target_mat` against `behavior_mat` on
/// the range of `behavior_mat`; +infinity when `target_mat` has mass outside
/// that range.
double range_restricted_eigenvalue(const Eigen::MatrixXd& target_mat,
                                   const Eigen::MatrixXd& behavior_mat) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(behavior_mat);
  const auto& evals = es.eigenvalues();
  long kept = 0;
  for (long i = 0; i < evals.size(); ++i)
    if (evals(i) > kEigCutoff) ++kept;
  long d = behavior_mat.rows();
  Eigen::MatrixXd basis(d, kept);
  Eigen::VectorXd scale(kept);
  for (long i = evals.size() - kept, j = 0; i < evals.size(); ++i, ++j) {
    basis.col(j) = es.eigenvectors().col(i);
    scale(j) = 1.0 / std::sqrt(evals(i));
  }
  Eigen::MatrixXd off_range =
      Eigen::MatrixXd::Identity(d, d) - basis * basis.transpose();
  if ((off_range * target_mat * off_range).trace() > kEigCutoff) return kInf;
  if (kept == 0) return 1.0;  // both matrices numerically zero
  Eigen::MatrixXd reduced = scale.asDiagonal() *
                            (basis.transpose() * target_mat * basis) *
                            scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> inner(reduced);
  return inner.eigenvalues().maxCoeff();
}

/// Largest single-observation probability inside the per-row ball, as a
/// ratio against the center probability p.
double row_ratio_sup(double p, Divergence div, double xi) {
  if (div == Divergence::kTV) {
    if (p <= 0.0) return xi > 0.0 ? kInf : 1.0;
    return std::min(p + xi, 1.0) / p;
  }
  // KL: the tightest member concentrates the remaining mass proportionally
  // to the center, giving divergence t log(t/p) + (1-t) log((1-t)/(1-p)).
  if (p <= 0.0) return 1.0;  // off-support mass is forced to stay 0
  if (p >= 1.0) return 1.0;
  auto div_at = [&](double t) {
    double first = t <= 0.0 ? 0.0 : t * std::log(t / p);
    double second = t >= 1.0 ? 0.0 : (1.0 - t) * std::log((1.0 - t) / (1.0 - p));
    return first + second;
  };
  if (div_at(1.0) <= xi) return 1.0 / p;
  double lo = p, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (div_at(mid) <= xi ? lo : hi) = mid;
  }
  return lo / p;
}

}  // namespace

double type1_coeff(const Policy& target, const Policy& behavior,
                   const TabularModel& model, const CoreTests& tests) {
  return coverage_report(target, behavior, model, tests).type1;
}

double type2_coeff(const Policy& target, const Policy& behavior,
                   const TabularModel& model) {
  check_policies(target, behavior, model);
  const Dims& d = model.dims();
  double total = 0.0;
  for (int h = 1; h <= d.horizon; ++h) {
    std::vector<double> dt = history_distribution(model, target, h);
    std::vector<double> db = history_distribution(model, behavior, h);
    for (std::size_t t = 0; t < dt.size(); ++t) {
      if (dt[t] <= 0.0) continue;
      if (db[t] <= 0.0) return kInf;
      total += dt[t] * dt[t] / db[t];
    }
  }
  return total;
}

double pointwise_ratio_bound(const Policy& target, const Policy& behavior,
                             const TabularModel& model) {
  check_policies(target, behavior, model);
  const Dims& d = model.dims();
  double best = 1.0;  // level 0 is the shared empty history
  for (int h = 1; h < d.horizon; ++h) {
    std::vector<double> dt = history_distribution(model, target, h);
    std::vector<double> db = history_distribution(model, behavior, h);
    for (std::size_t t = 0; t < dt.size(); ++t) {
      if (dt[t] <= 0.0) continue;
      if (db[t] <= 0.0) return kInf;
      best = std::max(best, dt[t] / db[t]);
    }
  }
  return best;
}

CoverageReport coverage_report(const Policy& target, const Policy& behavior,
                               const TabularModel& model,
                               const CoreTests& tests) {
  check_policies(target, behavior, model);
  if (tests.dims() != model.dims()) fail("shape", "dimension mismatch");
  const Dims& d = model.dims();

  CoverageReport out;
  out.type1_per_level.reserve(d.horizon);
  for (int h = 0; h < d.horizon; ++h) {
    long dim = tests.feature_dim(h);
    Eigen::MatrixXd target_mat = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd behavior_mat = Eigen::MatrixXd::Zero(dim, dim);
    if (h == 0) {
      Eigen::VectorXd psi0 = prediction_feature(model, tests, {}, {}, 0);
      target_mat = behavior_mat = psi0 * psi0.transpose();
    } else {
      std::vector<double> dt = history_distribution(model, target, h);
      std::vector<double> db = history_distribution(model, behavior, h);
      std::vector<int> obs(h), acts(h);
      for (long t = 0; t < static_cast<long>(dt.size()); ++t) {
        if (dt[t] <= 0.0 && db[t] <= 0.0) continue;
        unrank_history(d, h, t, obs, acts);
        Eigen::VectorXd psi = prediction_feature(model, tests, obs, acts, h);
        Eigen::MatrixXd outer = psi * psi.transpose();
        target_mat += dt[t] * outer;
        behavior_mat += db[t] * outer;
      }
    }
    out.type1_per_level.push_back(
        range_restricted_eigenvalue(target_mat, behavior_mat));
  }
  out.type1 = *std::max_element(out.type1_per_level.begin(),
                                out.type1_per_level.end());

  out.type2_per_step.reserve(d.horizon);
  for (int h = 1; h <= d.horizon; ++h) {
    std::vector<double> dt = history_distribution(model, target, h);
    std::vector<double> db = history_distribution(model, behavior, h);
    double step = 0.0;
    for (std::size_t t = 0; t < dt.size(); ++t) {
      if (dt[t] <= 0.0) continue;
      if (db[t] <= 0.0) {
        step = kInf;
        break;
      }
      step += dt[t] * dt[t] / db[t];
    }
    out.type2_per_step.push_back(step);
  }
  out.type2 = 0.0;
  for (double s : out.type2_per_step) out.type2 += s;

  out.pointwise = pointwise_ratio_bound(target, behavior, model);
  return out;
}

double wellness_cb(const TabularModel& center, const UncertaintySpec& spec,
                   const SimplexGrid& grid, long cap) {
  spec.validate();
  const Dims& d = center.dims();
  double best = 1.0;
  std::vector<int> obs, acts;
  for_each_ball_member(center, spec, grid, cap, [&](const TabularModel& m) {
    for (int h = 1; h <= d.horizon && std::isfinite(best); ++h) {
      long n = d.history_count(h);
      obs.assign(h, 0);
      acts.assign(h, 0);
      for (long t = 0; t < n; ++t) {
        unrank_history(d, h, t, obs, acts);
        double pc = history_obs_prob(center, obs, acts, h);
        double pm = history_obs_prob(m, obs, acts, h);
        if (pc <= 0.0) {
          if (pm > 0.0) {
            best = kInf;
            break;
          }
          continue;  // 0/0 counts as 1
        }
        best = std::max(best, pm / pc);
      }
    }
  });
  return best;
}

double wellness_cb_exact_t(const TabularModel& center,
                           const UncertaintySpec& spec) {
  spec.validate();
  if (spec.set != SetKind::kT) fail("shape", "rectangular spec expected");
  const Dims& d = center.dims();
  // ratio[tau_h rank] = sup over members of P_member(tau_h) / P_center(tau_h);
  // per-row suprema multiply because rows perturb independently and every
  // per-row factor is >= 1 (so the maximum sits at full depth).
  std::vector<double> ratio(d.history_count(1), 1.0);
  double best = 1.0;
  for (int h = 1; h < d.horizon; ++h) {
    std::vector<double> next(d.history_count(h + 1), 0.0);
    for (long t = 0; t < static_cast<long>(ratio.size()); ++t) {
      auto row = center.transition_row(h, t);
      for (int o = 0; o < d.num_obs; ++o) {
        double r = ratio[t] * row_ratio_sup(row[o], spec.div, spec.radius);
        for (int a = 0; a < d.num_actions; ++a)
          next[extend_history(d, t, o, a)] = r;
        best = std::max(best, r);
      }
    }
    ratio = std::move(next);
  }
  return best;
}

double suboptimality_gap(const Policy& chosen,
                         std::span<const Policy> candidates,
                         const TabularModel& model, const RewardSpec& reward,
                         const UncertaintySpec& spec) {
  RobustValueOptions options;
  options.cross_check = false;
  double best = -kInf;
  for (const Policy& pi : candidates)
    best = std::max(best,
                    robust_value(model, pi, reward, spec, options).value);
  double got = robust_value(model, chosen, reward, spec, options).value;
  return best - got;
}

}  // namespace robustpsr
