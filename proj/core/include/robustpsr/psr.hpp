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

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "robustpsr/process.hpp"

namespace robustpsr {

/// One future trajectory fragment (o_{h+1:h+L}, a_{h+1:h+L}); L may be
/// shorter than the remaining horizon (truncated test), in which case the
/// associated probability marginalizes the steps after h+L.
struct CoreTest {
  std::vector<int> obs;
  std::vector<int> acts;

  bool operator==(const CoreTest&) const = default;
};

/**
 * Per-level families of core tests Q_h for h = 0..H-1.  Level h tests are
 * futures starting at step h+1; their conditional probabilities given a
 * length-h history form the prediction feature of that history.  Level H has
 * an implicit single empty test (feature dimension 1) used internally by the
 * operator extraction.
 */
class CoreTests {
 public:
  CoreTests(Dims dims, std::vector<std::vector<CoreTest>> per_level);

  /// All futures of length min(H-h, 2) at every level, in rank order.
  static CoreTests complete_short_tests(const Dims& dims);

  const Dims& dims() const { return dims_; }
  /// Tests at level h in [0, H-1].
  const std::vector<CoreTest>& level(int h) const;
  /// Feature dimension d_h: |Q_h| for h < H, 1 for h = H.
  long feature_dim(int h) const;
  /// max_h |Q_h|.
  long max_dim() const;
  /// Deduplicated action parts of level-h tests, first-occurrence order.
  std::vector<std::vector<int>> core_action_seqs(int h) const;

  bool operator==(const CoreTests&) const = default;

 private:
  Dims dims_;
  std::vector<std::vector<CoreTest>> per_level_;
};

/// Dense matrix of joint conditional probabilities
/// P(omega^o, tau^o | tau^a, omega^a) with rows indexed by tau_h ranks and
/// columns by future ranks, plus its numerical rank (singular values above
/// 1e-9 relative).
struct DynamicsMatrix {
  Eigen::MatrixXd matrix;
  int rank = 0;
};

/// Level h in [1, H-1] snapshots histories after h steps against all length
/// H-h futures.
DynamicsMatrix dynamics_matrix(const TabularModel& model, int h);

/**
 * Raw prediction feature psi(tau_h): entry l is the joint probability
 * P(q_l^o, tau_h^o | tau_h^a, q_l^a) of seeing the history's observations and
 * then the test's observations under their actions.  h = 0 gives psi_0.
 * Zero vector when the history itself has probability 0.
 */
Eigen::VectorXd raw_feature(const TabularModel& model, const CoreTests& tests,
                            std::span<const int> obs, std::span<const int> acts,
                            int h);

/// Normalized prediction feature psi(tau_h) / P(tau_h^o | tau_h^a); entries
/// are conditional test probabilities in [0, 1].
/// errors: "unreachable-history" when P(tau_h^o | tau_h^a) = 0.
Eigen::VectorXd prediction_feature(const TabularModel& model,
                                   const CoreTests& tests,
                                   std::span<const int> obs,
                                   std::span<const int> acts, int h);

/**
 * Extracted predictive-state representation: operators m[h-1][code(o,a)] map
 * level-(h-1) features to level-h features (h = 1..H, with the level-H
 * feature being the scalar joint probability), phi[h] predicts
 * P(tau_h^o | tau_h^a) from the level-h feature, and psi0 is the level-0
 * feature.  Satisfies, up to max_residual:
 *   psi(tau_h) = m_h(o_h, a_h) ... m_1(o_1, a_1) psi0
 *   sum_o phi_h^T m_h(o, a) = phi_{h-1}^T              for every a
 *   phi_h^T psi(tau_h) = P(tau_h^o | tau_h^a)
 */
struct PsrView {
  Dims dims;
  CoreTests tests;
  /// m[h-1][o * A + a] has shape feature_dim(h) x feature_dim(h-1).
  std::vector<std::vector<Eigen::MatrixXd>> m;
  /// phi[h] for h = 0..H; phi[H] = [1].
  std::vector<Eigen::VectorXd> phi;
  Eigen::VectorXd psi0;
  /// Numerical rank of the feature matrix at each level 0..H-1.
  std::vector<int> level_rank;
  /// Largest self-consistency violation (see above).
  double max_residual = 0.0;

  /// Feature of a history via the operator chain; h in [0, H].
  Eigen::VectorXd feature(std::span<const int> obs, std::span<const int> acts,
                          int h) const;
};

/**
 * Least-squares extraction of the PSR operators from exact model
 * probabilities.  Valid only when each level's test family spans the model's
 * dynamics: the numerical rank of the test-restricted dynamics matrix must
 * equal the rank of the full one at every level.
 * errors: "core-tests-insufficient" on any rank drop; "too-large".
 */
PsrView extract_psr(const TabularModel& model, const CoreTests& tests);

/**
 * Exact conditioning bound 1/gamma: the largest, over levels h in [0, H-1],
 * unit-l1 vectors x and policies, of sum_{omega_h} pi(omega_h) |m(omega_h)^T x|
 * with m(omega_h)^T = phi_H^T m_H(o_H, a_H) ... m_{h+1}(o_{h+1}, a_{h+1}).
 * The l1-ball maximum is attained at signed basis vectors and the objective
 * is sign-symmetric, so x ranges over e_i; the policy maximum is a backward
 * pass: F_H(z) = |phi_H^T z|, F_t(z) = max_a sum_o F_{t+1}(m_{t+1}(o, a) z).
 */
double gamma_condition(const PsrView& view);
double gamma_condition(const TabularModel& model, const CoreTests& tests);

}  // namespace robustpsr
