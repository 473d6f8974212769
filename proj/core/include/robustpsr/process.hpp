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

#include <functional>
#include <span>
#include <vector>

#include "robustpsr/common.hpp"
#include "robustpsr/indexing.hpp"

namespace robustpsr {

/**
 * Tabular episodic process with history-dependent dynamics.  The episode emits
 * a fixed initial observation o_1, then alternates actions and observations:
 * for h = 1..H-1 the next observation is drawn from a distribution conditioned
 * on the full history tau_h = (o_{1:h}, a_{1:h}).
 *
 * Transition tables are dense: table h (h = 1..H-1) has one row of num_obs
 * probabilities per tau_h rank, including rows for histories that cannot occur
 * (e.g. wrong first observation); those rows are carried but never weighted.
 */
class TabularModel {
 public:
  /// transitions[h-1] is a flat row-major table of size
  /// history_count(h) * num_obs.  Rows must be nonnegative and sum to 1
  /// within 1e-12.
  TabularModel(Dims dims, int initial_obs,
               std::vector<std::vector<double>> transitions);

  const Dims& dims() const { return dims_; }
  int initial_obs() const { return initial_obs_; }

  /// Row of T_h(. | tau_h); h in [1, H-1].
  std::span<const double> transition_row(int h, long hist_rank) const;
  std::span<double> mutable_transition_row(int h, long hist_rank);

  double transition(int h, long hist_rank, int next_obs) const {
    return transition_row(h, hist_rank)[next_obs];
  }

  const std::vector<std::vector<double>>& tables() const { return tables_; }

  bool operator==(const TabularModel&) const = default;

 private:
  Dims dims_;
  int initial_obs_ = 0;
  std::vector<std::vector<double>> tables_;
};

/**
 * History-dependent policy: for each h = 1..H a dense table of action
 * distributions conditioned on x_h = (o_{1:h}, a_{1:h-1}).
 */
class Policy {
 public:
  /// probs[h-1] is a flat row-major table of size infoset_count(h) *
  /// num_actions.  Rows must be distributions; when `deterministic` each row
  /// must put mass 1 on a single action.
  Policy(Dims dims, std::vector<std::vector<double>> probs,
         bool deterministic = false);

  const Dims& dims() const { return dims_; }
  bool deterministic() const { return deterministic_; }

  std::span<const double> action_row(int h, long infoset_rank) const;
  std::span<double> mutable_action_row(int h, long infoset_rank);

  double prob(int h, long infoset_rank, int action) const {
    return action_row(h, infoset_rank)[action];
  }

  bool operator==(const Policy&) const = default;

 private:
  Dims dims_;
  bool deterministic_ = false;
  std::vector<std::vector<double>> tables_;
};

/// Terminal reward table indexed by the rank of the full trajectory
/// tau_H = (o_{1:H}, a_{1:H}); values must lie in [0, 1].  Per-step rewards
/// are represented by pre-summing them into this table.
class RewardSpec {
 public:
  RewardSpec(Dims dims, std::vector<double> values);

  const Dims& dims() const { return dims_; }
  double at(long traj_rank) const { return values_[traj_rank]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }

  bool operator==(const RewardSpec&) const = default;

 private:
  Dims dims_;
  std::vector<double> values_;
};

/// One sampled or enumerated episode: H observations and H actions.
struct Trajectory {
  std::vector<int> obs;
  std::vector<int> acts;

  bool operator==(const Trajectory&) const = default;
};

/// Probability of the observation sequence under the dynamics alone, i.e.
/// prod_h T_h(o_{h+1} | tau_h), with an indicator on the first observation.
double traj_prob_dynamics(const TabularModel& model, const Trajectory& traj);

/// Joint probability of the trajectory under dynamics and policy.
double traj_prob_policy(const TabularModel& model, const Policy& policy,
                        const Trajectory& traj);

/// Probability of a history prefix (o_{1:h}, a_{1:h}) under dynamics and
/// policy.  h may be 0 (returns 1).
double history_prob(const TabularModel& model, const Policy& policy,
                    std::span<const int> obs, std::span<const int> acts, int h);

/// P(tau_h^o | tau_h^a): chain probability of the prefix observations given
/// its actions, with no policy factor.
double history_obs_prob(const TabularModel& model, std::span<const int> obs,
                        std::span<const int> acts, int h);

/**
 * Dense joint distribution over full-trajectory ranks (size (OA)^H, zeros on
 * trajectories whose first observation differs from the model's).  Raises
 * "too-large" when the rank space exceeds `cap`.
 */
std::vector<double> trajectory_distribution(const TabularModel& model,
                                            const Policy& policy,
                                            long cap = kEnumerationCap);

/// Dense distribution over tau_h ranks for one prefix length.
std::vector<double> history_distribution(const TabularModel& model,
                                         const Policy& policy, int h,
                                         long cap = kEnumerationCap);

/// Exact expected terminal reward by enumeration.
double value(const TabularModel& model, const Policy& policy,
             const RewardSpec& reward, long cap = kEnumerationCap);

/// Expectation of an arbitrary terminal function given as a dense table over
/// trajectory ranks.
double value_table(const TabularModel& model, const Policy& policy,
                   std::span<const double> terminal, long cap = kEnumerationCap);

/// l1 distance between the trajectory distributions of two models under a
/// shared policy: sum_tau |D_a(tau) - D_b(tau)|.
double l1_model_distance(const TabularModel& a, const TabularModel& b,
                         const Policy& policy, long cap = kEnumerationCap);

/// Squared Hellinger distance (1/2) sum (sqrt p - sqrt q)^2 between the two
/// trajectory distributions; lies in [0, 1].
double hellinger_sq(const TabularModel& a, const TabularModel& b,
                    const Policy& policy, long cap = kEnumerationCap);

/// Draws one episode.  Deterministic given the generator state.
Trajectory sample_trajectory(const TabularModel& model, const Policy& policy,
                             Rng& rng);
Trajectory sample_trajectory(const TabularModel& model, const Policy& policy,
                             std::uint64_t seed);

/// Visits every trajectory with first observation o_1 together with its joint
/// probability.  fn(traj, full_rank, joint_prob).
void for_each_trajectory(
    const TabularModel& model, const Policy& policy,
    const std::function<void(const Trajectory&, long, double)>& fn);

/// Uniform policy over actions for every prefix.
Policy uniform_policy(const Dims& dims);

/// Policy that plays action a_h = acts[h-1] at step h regardless of history.
Policy constant_policy(const Dims& dims, const std::vector<int>& acts);

}  // namespace robustpsr
