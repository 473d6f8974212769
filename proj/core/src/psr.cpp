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

#include "robustpsr/psr.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace robustpsr {

namespace {

constexpr double kRankRelTol = 1e-9;

int numerical_rank(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] <= 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > kRankRelTol * sv[0]) ++r;
  return r;
}

}  // namespace

CoreTests::CoreTests(Dims dims, std::vector<std::vector<CoreTest>> per_level)
    : dims_(dims), per_level_(std::move(per_level)) {
  dims_.validate();
  if (per_level_.size() != static_cast<std::size_t>(dims_.horizon))
    fail("shape", "one test family per level 0..H-1 required");
  for (int h = 0; h < dims_.horizon; ++h) {
    if (per_level_[h].empty()) fail("shape", "empty test family");
    for (const CoreTest& t : per_level_[h]) {
      std::size_t len = t.obs.size();
      if (len == 0 || len != t.acts.size() ||
          len > static_cast<std::size_t>(dims_.horizon - h))
        fail("shape", "test length must be in [1, H-h]");
      for (std::size_t i = 0; i < len; ++i) {
        if (t.obs[i] < 0 || t.obs[i] >= dims_.num_obs || t.acts[i] < 0 ||
            t.acts[i] >= dims_.num_actions)
          fail("shape", "test symbol out of range");
      }
    }
  }
}

CoreTests CoreTests::complete_short_tests(const Dims& dims) {
  dims.validate();
  std::vector<std::vector<CoreTest>> levels(dims.horizon);
  for (int h = 0; h < dims.horizon; ++h) {
    int len = std::min(dims.horizon - h, 2);
    long count = dims.history_count(len);
    for (long r = 0; r < count; ++r) {
      CoreTest t;
      unrank_history(dims, len, r, t.obs, t.acts);
      levels[h].push_back(std::move(t));
    }
  }
  return CoreTests(dims, std::move(levels));
}

const std::vector<CoreTest>& CoreTests::level(int h) const {
  if (h < 0 || h >= dims_.horizon) fail("shape", "test level out of range");
  return per_level_[h];
}

long CoreTests::feature_dim(int h) const {
  if (h == dims_.horizon) return 1;  // implicit empty test
  return static_cast<long>(level(h).size());
}

long CoreTests::max_dim() const {
  long d = 1;
  for (int h = 0; h < dims_.horizon; ++h)
    d = std::max(d, feature_dim(h));
  return d;
}

std::vector<std::vector<int>> CoreTests::core_action_seqs(int h) const {
  std::vector<std::vector<int>> seqs;
  for (const CoreTest& t : level(h))
    if (std::find(seqs.begin(), seqs.end(), t.acts) == seqs.end())
      seqs.push_back(t.acts);
  return seqs;
}

DynamicsMatrix dynamics_matrix(const TabularModel& model, int h) {
  const Dims& d = model.dims();
  if (h < 1 || h >= d.horizon) fail("shape", "level must be in [1, H-1]");
  long total = d.history_count(d.horizon);
  long cols = d.history_count(d.horizon - h);
  long rows = total / cols;
  DynamicsMatrix out;
  out.matrix.setZero(rows, cols);
  Trajectory traj;
  for (long t = 0; t < total; ++t) {
    unrank_history(d, d.horizon, t, traj.obs, traj.acts);
    out.matrix(t / cols, t % cols) = traj_prob_dynamics(model, traj);
  }
  out.rank = numerical_rank(out.matrix);
  return out;
}

Eigen::VectorXd raw_feature(const TabularModel& model, const CoreTests& tests,
                            std::span<const int> obs, std::span<const int> acts,
                            int h) {
  const Dims& d = model.dims();
  if (tests.dims() != d) fail("shape", "test dimensions mismatch");
  if (h < 0 || h > d.horizon) fail("shape", "level out of range");
  if (obs.size() < static_cast<std::size_t>(h) ||
      acts.size() < static_cast<std::size_t>(h))
    fail("shape", "history shorter than level");

  std::vector<int> cobs(obs.begin(), obs.begin() + h);
  std::vector<int> cacts(acts.begin(), acts.begin() + h);
  if (h == d.horizon) {
    Eigen::VectorXd v(1);
    v[0] = history_obs_prob(model, cobs, cacts, h);
    return v;
  }
  const auto& level = tests.level(h);
  Eigen::VectorXd v(static_cast<Eigen::Index>(level.size()));
  for (std::size_t l = 0; l < level.size(); ++l) {
    const CoreTest& t = level[l];
    cobs.resize(h);
    cacts.resize(h);
    cobs.insert(cobs.end(), t.obs.begin(), t.obs.end());
    cacts.insert(cacts.end(), t.acts.begin(), t.acts.end());
    v[static_cast<Eigen::Index>(l)] =
        history_obs_prob(model, cobs, cacts, h + static_cast<int>(t.obs.size()));
  }
  return v;
}

Eigen::VectorXd prediction_feature(const TabularModel& model,
                                   const CoreTests& tests,
                                   std::span<const int> obs,
                                   std::span<const int> acts, int h) {
  double denom = history_obs_prob(model, obs, acts, h);
  if (denom <= 0.0)
    fail("unreachable-history", "history has probability zero");
  return raw_feature(model, tests, obs, acts, h) / denom;
}

Eigen::VectorXd PsrView::feature(std::span<const int> obs,
                                 std::span<const int> acts, int h) const {
  if (h < 0 || h > dims.horizon) fail("shape", "level out of range");
  Eigen::VectorXd v = psi0;
  for (int t = 1; t <= h; ++t)
    v = m[t - 1][step_code(dims, obs[t - 1], acts[t - 1])] * v;
  return v;
}

PsrView extract_psr(const TabularModel& model, const CoreTests& tests) {
  const Dims& d = model.dims();
  if (tests.dims() != d) fail("shape", "test dimensions mismatch");
  const int H = d.horizon;

  // Feature matrices Psi_h (tests x histories) and marginal history
  // probabilities p_h, from exact model probabilities.
  std::vector<Eigen::MatrixXd> psi(H + 1);
  std::vector<Eigen::VectorXd> pmarg(H + 1);
  std::vector<int> hobs, hacts;
  for (int h = 0; h <= H; ++h) {
    long n = d.history_count(h);
    psi[h].setZero(tests.feature_dim(h), n);
    pmarg[h].setZero(n);
    for (long r = 0; r < n; ++r) {
      unrank_history(d, h, r, hobs, hacts);
      psi[h].col(r) = raw_feature(model, tests, hobs, hacts, h);
      pmarg[h][r] = history_obs_prob(model, hobs, hacts, h);
    }
  }

  // Core-test sufficiency: the test-restricted dynamics matrix must keep the
  // full rank at every level that feeds an operator regression.
  PsrView view{d, tests, {}, {}, Eigen::VectorXd(), {}, 0.0};
  view.level_rank.resize(H);
  for (int h = 0; h < H; ++h) {
    int full;
    if (h == 0) {
      full = pmarg[H].cwiseAbs().maxCoeff() > 0.0 ? 1 : 0;
    } else {
      full = dynamics_matrix(model, h).rank;
    }
    int sub = numerical_rank(psi[h]);
    view.level_rank[h] = sub;
    if (sub < full)
      fail("core-tests-insufficient",
           "test family does not span the dynamics at some level");
  }

  view.psi0 = psi[0].col(0);
  view.m.resize(H);
  view.phi.resize(H + 1);

  // Operators by minimum-norm least squares against the previous level's
  // features; one factorization per level, shared across (o, a).
  for (int h = 1; h <= H; ++h) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(kRankRelTol);
    cod.compute(psi[h - 1].transpose());
    long nprev = d.history_count(h - 1);
    view.m[h - 1].resize(d.pair_count());
    for (long code = 0; code < d.pair_count(); ++code) {
      Eigen::MatrixXd target(nprev, tests.feature_dim(h));
      for (long r = 0; r < nprev; ++r)
        target.row(r) = psi[h].col(r * d.pair_count() + code).transpose();
      view.m[h - 1][code] = cod.solve(target).transpose();
    }
  }

  // phi_h from phi^T Psi_h = p_h; phi_H = [1] by the empty-test convention.
  for (int h = 0; h < H; ++h) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(kRankRelTol);
    cod.compute(psi[h].transpose());
    view.phi[h] = cod.solve(pmarg[h]);
  }
  view.phi[H] = Eigen::VectorXd::Ones(1);

  // Self-consistency residuals.
  double res = 0.0;
  for (int h = 1; h <= H; ++h) {
    long nprev = d.history_count(h - 1);
    for (long r = 0; r < nprev; ++r) {
      for (long code = 0; code < d.pair_count(); ++code) {
        Eigen::VectorXd pred = view.m[h - 1][code] * psi[h - 1].col(r);
        res = std::max(
            res, (pred - psi[h].col(r * d.pair_count() + code))
                     .cwiseAbs()
                     .maxCoeff());
      }
    }
    for (int a = 0; a < d.num_actions; ++a) {
      Eigen::VectorXd flow = Eigen::VectorXd::Zero(tests.feature_dim(h - 1));
      for (int o = 0; o < d.num_obs; ++o)
        flow += view.m[h - 1][step_code(d, o, a)].transpose() * view.phi[h];
      res = std::max(res, (flow - view.phi[h - 1]).cwiseAbs().maxCoeff());
    }
  }
  for (int h = 0; h <= H; ++h) {
    Eigen::VectorXd pred = psi[h].transpose() * view.phi[h];
    res = std::max(res, (pred - pmarg[h]).cwiseAbs().maxCoeff());
  }
  view.max_residual = res;
  return view;
}

double gamma_condition(const PsrView& view) {
  const Dims& d = view.dims;
  // F_t(z) = max_a sum_o F_{t+1}(m_{t+1}(o, a) z), F_H(z) = |phi_H^T z|.
  std::function<double(int, const Eigen::VectorXd&)> backward =
      [&](int t, const Eigen::VectorXd& z) -> double {
    if (t == d.horizon) return std::abs(view.phi[d.horizon].dot(z));
    double best = 0.0;
    for (int a = 0; a < d.num_actions; ++a) {
      double acc = 0.0;
      for (int o = 0; o < d.num_obs; ++o)
        acc += backward(t + 1, view.m[t][step_code(d, o, a)] * z);
      best = std::max(best, acc);
    }
    return best;
  };
  double worst = 0.0;
  for (int h = 0; h < d.horizon; ++h) {
    long dim = view.tests.feature_dim(h);
    for (long i = 0; i < dim; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
      e[i] = 1.0;
      worst = std::max(worst, backward(h, e));
    }
  }
  return worst;
}

double gamma_condition(const TabularModel& model, const CoreTests& tests) {
  return gamma_condition(extract_psr(model, tests));
}

}  // namespace robustpsr
