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

#include "robustpsr/process.hpp"

#include <cassert>
#include <cmath>
#include <cstdio>

namespace robustpsr {

namespace {

constexpr double kRowSumTol = 1e-12;

void check_distribution_rows(const std::vector<double>& table, long rows,
                             int cols, const char* what) {
  if (static_cast<long>(table.size()) != rows * cols)
    fail("shape", std::string(what) + ": table size mismatch");
  for (long r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (int c = 0; c < cols; ++c) {
      double v = table[r * cols + c];
      if (v < 0.0 || std::isnan(v))
        fail("shape", std::string(what) + ": negative or NaN entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
      fail("shape", std::string(what) + ": row does not sum to 1");
  }
}

void check_trajectory(const Dims& d, const Trajectory& traj) {
  if (static_cast<int>(traj.obs.size()) != d.horizon ||
      static_cast<int>(traj.acts.size()) != d.horizon)
    fail("shape", "trajectory length mismatch");
  for (int o : traj.obs)
    if (o < 0 || o >= d.num_obs) fail("shape", "observation out of range");
  for (int a : traj.acts)
    if (a < 0 || a >= d.num_actions) fail("shape", "action out of range");
}

}  // namespace

TabularModel::TabularModel(Dims dims, int initial_obs,
                           std::vector<std::vector<double>> transitions)
    : dims_(dims), initial_obs_(initial_obs), tables_(std::move(transitions)) {
  dims_.validate();
  if (initial_obs_ < 0 || initial_obs_ >= dims_.num_obs)
    fail("shape", "initial observation out of range");
  if (static_cast<int>(tables_.size()) != dims_.horizon - 1)
    fail("shape", "expected one transition table per step 1..H-1");
  for (int h = 1; h < dims_.horizon; ++h)
    check_distribution_rows(tables_[h - 1], dims_.history_count(h),
                            dims_.num_obs, "transition");
}

std::span<const double> TabularModel::transition_row(int h,
                                                     long hist_rank) const {
  assert(h >= 1 && h < dims_.horizon);
  const auto& t = tables_[h - 1];
  return {t.data() + hist_rank * dims_.num_obs,
          static_cast<std::size_t>(dims_.num_obs)};
}

std::span<double> TabularModel::mutable_transition_row(int h, long hist_rank) {
  auto& t = tables_[h - 1];
  return {t.data() + hist_rank * dims_.num_obs,
          static_cast<std::size_t>(dims_.num_obs)};
}

Policy::Policy(Dims dims, std::vector<std::vector<double>> probs,
               bool deterministic)
    : dims_(dims), deterministic_(deterministic), tables_(std::move(probs)) {
  dims_.validate();
  if (static_cast<int>(tables_.size()) != dims_.horizon)
    fail("shape", "expected one action table per step 1..H");
  for (int h = 1; h <= dims_.horizon; ++h) {
    check_distribution_rows(tables_[h - 1], dims_.infoset_count(h),
                            dims_.num_actions, "policy");
    if (deterministic_) {
      const auto& t = tables_[h - 1];
      long rows = dims_.infoset_count(h);
      for (long r = 0; r < rows; ++r) {
        int ones = 0;
        for (int a = 0; a < dims_.num_actions; ++a)
          if (t[r * dims_.num_actions + a] == 1.0) ++ones;
        if (ones != 1)
          fail("shape", "deterministic policy row must put mass 1 on one action");
      }
    }
  }
}

std::span<const double> Policy::action_row(int h, long infoset_rank) const {
  assert(h >= 1 && h <= dims_.horizon);
  const auto& t = tables_[h - 1];
  return {t.data() + infoset_rank * dims_.num_actions,
          static_cast<std::size_t>(dims_.num_actions)};
}

std::span<double> Policy::mutable_action_row(int h, long infoset_rank) {
  auto& t = tables_[h - 1];
  return {t.data() + infoset_rank * dims_.num_actions,
          static_cast<std::size_t>(dims_.num_actions)};
}

RewardSpec::RewardSpec(Dims dims, std::vector<double> values)
    : dims_(dims), values_(std::move(values)) {
  dims_.validate();
  if (static_cast<long>(values_.size()) != dims_.history_count(dims_.horizon))
    fail("shape", "reward table must cover every full trajectory rank");
  for (double v : values_)
    if (v < 0.0 || v > 1.0 || std::isnan(v))
      fail("shape", "reward values must lie in [0, 1]");
}

double traj_prob_dynamics(const TabularModel& model, const Trajectory& traj) {
  const Dims& d = model.dims();
  check_trajectory(d, traj);
  if (traj.obs[0] != model.initial_obs()) return 0.0;
  double p = 1.0;
  long hist = 0;
  for (int h = 1; h < d.horizon; ++h) {
    hist = extend_history(d, hist, traj.obs[h - 1], traj.acts[h - 1]);
    p *= model.transition(h, hist, traj.obs[h]);
    if (p == 0.0) return 0.0;
  }
  return p;
}

double traj_prob_policy(const TabularModel& model, const Policy& policy,
                        const Trajectory& traj) {
  const Dims& d = model.dims();
  if (policy.dims() != d) fail("shape", "policy dimensions mismatch");
  check_trajectory(d, traj);
  if (traj.obs[0] != model.initial_obs()) return 0.0;
  double p = 1.0;
  long hist = 0;  // rank of tau_{h-1}
  for (int h = 1; h <= d.horizon; ++h) {
    long x = infoset_rank(d, hist, traj.obs[h - 1]);
    p *= policy.prob(h, x, traj.acts[h - 1]);
    if (h < d.horizon) {
      hist = extend_history(d, hist, traj.obs[h - 1], traj.acts[h - 1]);
      p *= model.transition(h, hist, traj.obs[h]);
    }
    if (p == 0.0) return 0.0;
  }
  return p;
}

double history_prob(const TabularModel& model, const Policy& policy,
                    std::span<const int> obs, std::span<const int> acts,
                    int h) {
  const Dims& d = model.dims();
  if (h < 0 || h > d.horizon) fail("shape", "prefix length out of range");
  if (h == 0) return 1.0;
  if (obs[0] != model.initial_obs()) return 0.0;
  double p = 1.0;
  long hist = 0;
  for (int t = 1; t <= h; ++t) {
    long x = infoset_rank(d, hist, obs[t - 1]);
    p *= policy.prob(t, x, acts[t - 1]);
    hist = extend_history(d, hist, obs[t - 1], acts[t - 1]);
    if (t < h) p *= model.transition(t, hist, obs[t]);
    if (p == 0.0) return 0.0;
  }
  return p;
}

double history_obs_prob(const TabularModel& model, std::span<const int> obs,
                        std::span<const int> acts, int h) {
  const Dims& d = model.dims();
  if (h < 0 || h > d.horizon) fail("shape", "prefix length out of range");
  if (h == 0) return 1.0;
  if (obs[0] != model.initial_obs()) return 0.0;
  double p = 1.0;
  long hist = 0;
  for (int t = 1; t < h; ++t) {
    hist = extend_history(d, hist, obs[t - 1], acts[t - 1]);
    p *= model.transition(t, hist, obs[t]);
    if (p == 0.0) return 0.0;
  }
  return p;
}

void for_each_trajectory(
    const TabularModel& model, const Policy& policy,
    const std::function<void(const Trajectory&, long, double)>& fn) {
  const Dims& d = model.dims();
  if (policy.dims() != d) fail("shape", "policy dimensions mismatch");
  Trajectory traj;
  traj.obs.assign(d.horizon, 0);
  traj.acts.assign(d.horizon, 0);
  traj.obs[0] = model.initial_obs();

  // Depth-first walk over (a_1, o_2, a_2, ..., o_H, a_H) carrying the partial
  // joint probability; prunes zero-probability branches.
  std::function<void(int, long, double)> walk = [&](int h, long hist,
                                                    double p) {
    long x = infoset_rank(d, hist, traj.obs[h - 1]);
    for (int a = 0; a < d.num_actions; ++a) {
      double pa = p * policy.prob(h, x, a);
      if (pa == 0.0 && policy.prob(h, x, a) == 0.0) continue;
      traj.acts[h - 1] = a;
      long hist2 = extend_history(d, hist, traj.obs[h - 1], a);
      if (h == d.horizon) {
        fn(traj, hist2, pa);
        continue;
      }
      for (int o = 0; o < d.num_obs; ++o) {
        double po = pa * model.transition(h, hist2, o);
        if (po == 0.0 && model.transition(h, hist2, o) == 0.0) continue;
        traj.obs[h] = o;
        walk(h + 1, hist2, po);
      }
    }
  };
  walk(1, 0, 1.0);
}

std::vector<double> trajectory_distribution(const TabularModel& model,
                                            const Policy& policy, long cap) {
  const Dims& d = model.dims();
  long n = d.history_count(d.horizon);
  if (n > cap) fail("too-large", "trajectory rank space exceeds cap");
  std::vector<double> dist(n, 0.0);
  for_each_trajectory(model, policy,
                      [&](const Trajectory&, long rank, double p) {
                        dist[rank] += p;
                      });
  return dist;
}

std::vector<double> history_distribution(const TabularModel& model,
                                         const Policy& policy, int h,
                                         long cap) {
  const Dims& d = model.dims();
  if (h < 0 || h > d.horizon) fail("shape", "prefix length out of range");
  long n = d.history_count(h);
  if (n > cap) fail("too-large", "history rank space exceeds cap");
  std::vector<double> dist(n, 0.0);
  if (h == 0) {
    dist[0] = 1.0;
    return dist;
  }
  Trajectory traj;
  traj.obs.assign(h, 0);
  traj.acts.assign(h, 0);
  traj.obs[0] = model.initial_obs();
  std::function<void(int, long, double)> walk = [&](int t, long hist,
                                                    double p) {
    long x = infoset_rank(d, hist, traj.obs[t - 1]);
    for (int a = 0; a < d.num_actions; ++a) {
      double pa = p * policy.prob(t, x, a);
      if (policy.prob(t, x, a) == 0.0) continue;
      traj.acts[t - 1] = a;
      long hist2 = extend_history(d, hist, traj.obs[t - 1], a);
      if (t == h) {
        dist[hist2] += pa;
        continue;
      }
      for (int o = 0; o < d.num_obs; ++o) {
        if (model.transition(t, hist2, o) == 0.0) continue;
        traj.obs[t] = o;
        walk(t + 1, hist2, pa * model.transition(t, hist2, o));
      }
    }
  };
  walk(1, 0, 1.0);
  return dist;
}

double value(const TabularModel& model, const Policy& policy,
             const RewardSpec& reward, long cap) {
  if (reward.dims() != model.dims()) fail("shape", "reward dimensions mismatch");
  return value_table(model, policy, reward.values(), cap);
}

double value_table(const TabularModel& model, const Policy& policy,
                   std::span<const double> terminal, long cap) {
  const Dims& d = model.dims();
  long n = d.history_count(d.horizon);
  if (n > cap) fail("too-large", "trajectory rank space exceeds cap");
  if (static_cast<long>(terminal.size()) != n)
    fail("shape", "terminal table must cover every trajectory rank");
  double v = 0.0;
  for_each_trajectory(model, policy,
                      [&](const Trajectory&, long rank, double p) {
                        v += p * terminal[rank];
                      });
  return v;
}

double l1_model_distance(const TabularModel& a, const TabularModel& b,
                         const Policy& policy, long cap) {
  if (a.dims() != b.dims()) fail("shape", "model dimensions mismatch");
  auto pa = trajectory_distribution(a, policy, cap);
  auto pb = trajectory_distribution(b, policy, cap);
  double l1 = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) l1 += std::abs(pa[i] - pb[i]);
  return l1;
}

double hellinger_sq(const TabularModel& a, const TabularModel& b,
                    const Policy& policy, long cap) {
  if (a.dims() != b.dims()) fail("shape", "model dimensions mismatch");
  auto pa = trajectory_distribution(a, policy, cap);
  auto pb = trajectory_distribution(b, policy, cap);
  double acc = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    double dlt = std::sqrt(pa[i]) - std::sqrt(pb[i]);
    acc += dlt * dlt;
  }
  return 0.5 * acc;
}

Trajectory sample_trajectory(const TabularModel& model, const Policy& policy,
                             Rng& rng) {
  const Dims& d = model.dims();
  if (policy.dims() != d) fail("shape", "policy dimensions mismatch");
  Trajectory traj;
  traj.obs.assign(d.horizon, 0);
  traj.acts.assign(d.horizon, 0);
  traj.obs[0] = model.initial_obs();
  long hist = 0;
  for (int h = 1; h <= d.horizon; ++h) {
    long x = infoset_rank(d, hist, traj.obs[h - 1]);
    traj.acts[h - 1] = rng.sample(policy.action_row(h, x));
    hist = extend_history(d, hist, traj.obs[h - 1], traj.acts[h - 1]);
    if (h < d.horizon) traj.obs[h] = rng.sample(model.transition_row(h, hist));
  }
  return traj;
}

Trajectory sample_trajectory(const TabularModel& model, const Policy& policy,
                             std::uint64_t seed) {
  Rng rng(seed);
  return sample_trajectory(model, policy, rng);
}

Policy uniform_policy(const Dims& dims) {
  std::vector<std::vector<double>> tables(dims.horizon);
  for (int h = 1; h <= dims.horizon; ++h)
    tables[h - 1].assign(dims.infoset_count(h) * dims.num_actions,
                         1.0 / dims.num_actions);
  return Policy(dims, std::move(tables));
}

Policy constant_policy(const Dims& dims, const std::vector<int>& acts) {
  if (static_cast<int>(acts.size()) != dims.horizon)
    fail("shape", "need one action per step");
  std::vector<std::vector<double>> tables(dims.horizon);
  for (int h = 1; h <= dims.horizon; ++h) {
    tables[h - 1].assign(dims.infoset_count(h) * dims.num_actions, 0.0);
    long rows = dims.infoset_count(h);
    for (long r = 0; r < rows; ++r)
      tables[h - 1][r * dims.num_actions + acts[h - 1]] = 1.0;
  }
  return Policy(dims, std::move(tables), /*deterministic=*/true);
}

}  // namespace robustpsr
