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
#include <optional>
#include <vector>

#include "robustpsr/psr.hpp"
#include "robustpsr/robust_values.hpp"

namespace robustpsr {

/// Explicit finite hypothesis class: candidate models sharing dimensions and
/// a core-test family.  `nominal_index` tags the data-generating member for
/// experiment bookkeeping only; the fitting path never reads it.
struct ModelClass {
  std::vector<TabularModel> models;
  CoreTests tests;
  long nominal_index = 0;

  ModelClass(std::vector<TabularModel> models_in, CoreTests tests_in,
             long nominal = 0);
  const Dims& dims() const { return tests.dims(); }
  long size() const { return static_cast<long>(models.size()); }
};

/// Offline trajectories plus the behavior policy that collected them.
struct OfflineDataset {
  std::vector<Trajectory> trajectories;
  Policy behavior;

  OfflineDataset(std::vector<Trajectory> trajectories_in, Policy behavior_in);
  long size() const { return static_cast<long>(trajectories.size()); }
};

/// Draws N independent episodes from (model, behavior).
OfflineDataset sample_dataset(const TabularModel& model,
                              const Policy& behavior, long n,
                              std::uint64_t seed);

/// Maximum-likelihood selection over the class.
struct MleResult {
  long index = 0;
  /// Average negative log joint trajectory probability per class member.
  std::vector<double> losses;
  /// Joint trajectory probability of each sample under the selected model,
  /// cached for distillation.
  std::vector<double> fitted_probs;
};

/**
 * argmin over the class of (1/N) sum_n -log D_theta(tau^n), the average
 * negative log probability of each sampled trajectory under the candidate
 * dynamics and the behavior policy.  The policy factor is constant across
 * candidates, so it never changes the argmin.  Ties break to the lowest
 * index.
 * errors: "class-incompatible" when every member gives some sample
 * probability 0 (all losses infinite).
 */
MleResult mle_fit(const OfflineDataset& data, const ModelClass& cls);

/// Retained sample indices plus their seeded even split into H parts.
struct DistilledDataset {
  std::vector<long> retained;
  /// splits[h] partitions `retained`; sizes differ by at most one.
  std::vector<std::vector<long>> splits;
  double p_min = 0.0;
  bool empty = false;
};

/// Default retention threshold delta / (N (|O||A|)^{2H}).
double default_p_min(const Dims& dims, long n, double delta);

/**
 * Keeps samples whose cached fitted probability is at least p_min, then
 * shuffles them with the seed and deals them round-robin into H parts.
 */
DistilledDataset distill(const OfflineDataset& data,
                         std::span<const double> fitted_probs, double p_min,
                         std::uint64_t seed);

/**
 * Elliptical uncertainty bonus built from the fitted model's prediction
 * features: U_h = lambda I + sum over split-h samples of the outer product
 * of the length-h prefix feature, and
 *   b(tau_H) = min{ alpha sqrt( sum_h |feature_h(tau_H)|^2_{U_h^{-1}} ), 1 }.
 * Quadratic forms go through a symmetric positive-definite factorization.
 * Prefixes the fitted model cannot reach evaluate to the maximal bonus 1
 * (they carry zero weight in any expectation under the fitted model);
 * samples with unreachable prefixes are skipped during accumulation and
 * counted in `skipped` (impossible when p_min > 0).
 */
class BonusFn {
 public:
  BonusFn(const TabularModel& fitted, const CoreTests& tests,
          const DistilledDataset& distilled, const OfflineDataset& data,
          double lambda, double alpha);

  double operator()(std::span<const int> obs, std::span<const int> acts) const;
  double operator()(const Trajectory& traj) const;
  /// Dense table of the bonus over trajectory ranks, usable as a terminal
  /// reward under the fitted model.
  std::vector<double> table() const;

  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }
  long skipped() const { return skipped_; }
  const Eigen::MatrixXd& moment(int h) const { return moment_[h]; }

 private:
  Dims dims_;
  double lambda_ = 0.0;
  double alpha_ = 0.0;
  long skipped_ = 0;
  /// Per level h = 0..H-1: features of every dense length-h history under
  /// the fitted model (columns), a reachability mask, U_h, and its factor.
  std::vector<Eigen::MatrixXd> feature_;
  std::vector<std::vector<char>> reachable_;
  std::vector<Eigen::MatrixXd> moment_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> factor_;
};

BonusFn build_bonus(const TabularModel& fitted, const CoreTests& tests,
                    const DistilledDataset& distilled,
                    const OfflineDataset& data, double lambda, double alpha);

/// Smallest probability the behavior policy assigns to completing any core
/// action sequence, minimized over levels, histories, and interleaved
/// observations.
double min_core_action_prob(const Policy& behavior, const CoreTests& tests);

/// Tuning knobs of the penalized-value learner.  Negative entries select the
/// documented defaults.
struct LearnerParams {
  double delta = 0.1;
  /// Retention threshold; default delta / (N (|O||A|)^{2H}).
  double p_min = -1.0;
  /// Ridge weight; default H^2 Q_A^2 with Q_A the largest number of core
  /// action sequences at any level.
  double lambda = -1.0;
  /// Bonus scale; default Q_A sqrt(d H) / gamma^2 sqrt(lambda)
  ///   + sqrt(beta) / (iota gamma)
  /// with beta = log(|class| / delta), d the largest feature dimension,
  /// gamma the conditioning bound of the fitted model, and iota the minimum
  /// behavior probability of a core action sequence.  Requires iota > 0;
  /// otherwise alpha must be set explicitly.
  double alpha = -1.0;
  /// Scaling inputs for the pessimism constant; defaults are estimated from
  /// the fitted model (eta/lambda lower bounds, exact rectangular wellness).
  double eta_star = -1.0;
  double lambda_star = -1.0;
  double c_b = -1.0;
  std::uint64_t split_seed = 0;
  RobustValueOptions value_options = planning_options();
};

/// Outcome of the penalized-value learner, with the per-policy table the CLI
/// reports.
struct Alg1Result {
  long policy_index = 0;
  MleResult mle;
  DistilledDataset distilled;
  double scale = 0.0;      ///< pessimism constant applied to the bonus value
  double alpha = 0.0;      ///< resolved bonus scale
  double lambda = 0.0;     ///< resolved ridge weight
  double p_min = 0.0;      ///< resolved retention threshold
  std::vector<double> robust_values;  ///< per policy, under the fitted model
  std::vector<double> bonus_values;   ///< per policy, value of the bonus
  std::vector<double> objectives;     ///< robust - scale * bonus
};

/**
 * Pessimistic offline learner: fit by maximum likelihood, distill, build the
 * bonus, then return the policy maximizing
 *   robust value under the fitted model - scale * expected bonus,
 * the lower confidence bound of the true robust value.  Ties break to the
 * lowest index.
 */
Alg1Result algorithm1(const OfflineDataset& data, const ModelClass& cls,
                      std::span<const Policy> policies,
                      const RewardSpec& reward, const UncertaintySpec& spec,
                      const LearnerParams& params = {});

/// Members whose total dynamics log-likelihood is within beta of the best;
/// always contains every maximum-likelihood member.
std::vector<long> confidence_set(const OfflineDataset& data,
                                 const ModelClass& cls, double beta);

struct Alg2Result {
  long policy_index = 0;
  std::vector<long> confidence;
  /// objectives[p] = min over confidence members of the robust value.
  std::vector<double> objectives;
  /// member_values[p][j] = robust value of policy p under confidence[j].
  std::vector<std::vector<double>> member_values;
};

/**
 * Doubly pessimistic learner: build the likelihood confidence set (beta < 0
 * selects log(|class| / delta)), then return the policy maximizing the
 * worst robust value over the set.  Ties break to the lowest index.
 */
Alg2Result algorithm2(const OfflineDataset& data, const ModelClass& cls,
                      std::span<const Policy> policies,
                      const RewardSpec& reward, const UncertaintySpec& spec,
                      double beta = -1.0, double delta = 0.1,
                      const RobustValueOptions& value_options =
                          planning_options());

}  // namespace robustpsr
