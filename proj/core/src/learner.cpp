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

#include "robustpsr/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "robustpsr/diagnostics.hpp"

namespace robustpsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_trajectory(const Dims& d, const Trajectory& traj) {
  if (static_cast<int>(traj.obs.size()) != d.horizon ||
      static_cast<int>(traj.acts.size()) != d.horizon)
    fail("shape", "trajectory length mismatch");
  for (int o : traj.obs)
    if (o < 0 || o >= d.num_obs) fail("shape", "observation out of range");
  for (int a : traj.acts)
    if (a < 0 || a >= d.num_actions) fail("shape", "action out of range");
}

/// Deterministic Fisher-Yates with the project generator (the standard
/// library leaves std::shuffle implementation-defined).
void shuffle(std::vector<long>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i)
    std::swap(items[i - 1], items[rng.next_u64() % i]);
}

}  // namespace

ModelClass::ModelClass(std::vector<TabularModel> models_in, CoreTests tests_in,
                       long nominal)
    : models(std::move(models_in)), tests(std::move(tests_in)),
      nominal_index(nominal) {
  if (models.empty()) fail("shape", "empty model class");
  for (const TabularModel& m : models)
    if (m.dims() != tests.dims()) fail("shape", "class dimension mismatch");
  if (nominal_index < 0 || nominal_index >= size())
    fail("shape", "nominal index out of range");
}

OfflineDataset::OfflineDataset(std::vector<Trajectory> trajectories_in,
                               Policy behavior_in)
    : trajectories(std::move(trajectories_in)), behavior(std::move(behavior_in)) {
  if (trajectories.empty()) fail("shape", "empty dataset");
  for (const Trajectory& traj : trajectories)
    check_trajectory(behavior.dims(), traj);
}

OfflineDataset sample_dataset(const TabularModel& model,
                              const Policy& behavior, long n,
                              std::uint64_t seed) {
  if (n < 1) fail("shape", "dataset size must be positive");
  Rng rng(seed);
  std::vector<Trajectory> trajectories;
  trajectories.reserve(n);
  for (long i = 0; i < n; ++i)
    trajectories.push_back(sample_trajectory(model, behavior, rng));
  return OfflineDataset(std::move(trajectories), behavior);
}

MleResult mle_fit(const OfflineDataset& data, const ModelClass& cls) {
  if (data.behavior.dims() != cls.dims()) fail("shape", "dimension mismatch");
  long n = data.size();
  MleResult out;
  out.losses.assign(cls.size(), 0.0);
  double best = kInf;
  for (long j = 0; j < cls.size(); ++j) {
    double loss = 0.0;
    for (const Trajectory& traj : data.trajectories) {
      double p = traj_prob_policy(cls.models[j], data.behavior, traj);
      if (p <= 0.0) {
        loss = kInf;
        break;
      }
      loss -= std::log(p);
    }
    if (std::isfinite(loss)) loss /= static_cast<double>(n);
    out.losses[j] = loss;
    if (loss < best) {
      best = loss;
      out.index = j;
    }
  }
  if (!std::isfinite(best))
    fail("class-incompatible", "every candidate gives some sample probability 0");
  out.fitted_probs.reserve(n);
  for (const Trajectory& traj : data.trajectories)
    out.fitted_probs.push_back(
        traj_prob_policy(cls.models[out.index], data.behavior, traj));
  return out;
}

double default_p_min(const Dims& dims, long n, double delta) {
  if (n < 1 || delta <= 0.0) fail("shape", "invalid threshold inputs");
  return delta / (static_cast<double>(n) *
                  std::pow(static_cast<double>(dims.pair_count()),
                           2.0 * dims.horizon));
}

DistilledDataset distill(const OfflineDataset& data,
                         std::span<const double> fitted_probs, double p_min,
                         std::uint64_t seed) {
  if (fitted_probs.size() != static_cast<std::size_t>(data.size()))
    fail("shape", "probability cache size mismatch");
  if (p_min < 0.0) fail("shape", "negative retention threshold");
  DistilledDataset out;
  out.p_min = p_min;
  for (long i = 0; i < data.size(); ++i)
    if (fitted_probs[i] >= p_min) out.retained.push_back(i);
  out.empty = out.retained.empty();

  std::vector<long> order = out.retained;
  Rng rng(seed);
  shuffle(order, rng);
  int parts = data.behavior.dims().horizon;
  out.splits.assign(parts, {});
  for (std::size_t i = 0; i < order.size(); ++i)
    out.splits[i % parts].push_back(order[i]);
  return out;
}

BonusFn::BonusFn(const TabularModel& fitted, const CoreTests& tests,
                 const DistilledDataset& distilled, const OfflineDataset& data,
                 double lambda, double alpha)
    : dims_(fitted.dims()), lambda_(lambda), alpha_(alpha) {
  if (tests.dims() != dims_ || data.behavior.dims() != dims_)
    fail("shape", "dimension mismatch");
  if (lambda <= 0.0 || alpha < 0.0) fail("shape", "invalid bonus parameters");
  if (static_cast<int>(distilled.splits.size()) != dims_.horizon)
    fail("shape", "split count mismatch");

  int horizon = dims_.horizon;
  feature_.resize(horizon);
  reachable_.resize(horizon);
  moment_.resize(horizon);
  factor_.resize(horizon);
  std::vector<int> obs, acts;
  for (int h = 0; h < horizon; ++h) {
    long histories = dims_.history_count(h);
    long dim = tests.feature_dim(h);
    feature_[h] = Eigen::MatrixXd::Zero(dim, histories);
    reachable_[h].assign(histories, 0);
    for (long t = 0; t < histories; ++t) {
      unrank_history(dims_, h, t, obs, acts);
      if (history_obs_prob(fitted, obs, acts, h) <= 0.0) continue;
      reachable_[h][t] = 1;
      feature_[h].col(t) = prediction_feature(fitted, tests, obs, acts, h);
    }
    moment_[h] = lambda * Eigen::MatrixXd::Identity(dim, dim);
    for (long i : distilled.splits[h]) {
      const Trajectory& traj = data.trajectories[i];
      long rank = history_rank(dims_, traj.obs, traj.acts, h);
      if (!reachable_[h][rank]) {
        ++skipped_;
        continue;
      }
      moment_[h] += feature_[h].col(rank) * feature_[h].col(rank).transpose();
    }
    factor_[h].compute(moment_[h]);
    if (factor_[h].info() != Eigen::Success)
      fail("shape", "bonus moment matrix not positive definite");
  }
}

double BonusFn::operator()(std::span<const int> obs,
                           std::span<const int> acts) const {
  if (static_cast<int>(obs.size()) < dims_.horizon - 1 ||
      static_cast<int>(acts.size()) < dims_.horizon - 1)
    fail("shape", "trajectory too short for bonus evaluation");
  double acc = 0.0;
  long rank = 0;
  for (int h = 0; h < dims_.horizon; ++h) {
    if (!reachable_[h][rank]) return 1.0;
    Eigen::VectorXd v = feature_[h].col(rank);
    acc += v.dot(factor_[h].solve(v));
    if (h + 1 < dims_.horizon) rank = extend_history(dims_, rank, obs[h], acts[h]);
  }
  return std::min(alpha_ * std::sqrt(acc), 1.0);
}

double BonusFn::operator()(const Trajectory& traj) const {
  return (*this)(traj.obs, traj.acts);
}

std::vector<double> BonusFn::table() const {
  long n = dims_.history_count(dims_.horizon);
  std::vector<double> out(n, 0.0);
  std::vector<int> obs, acts;
  for (long t = 0; t < n; ++t) {
    unrank_history(dims_, dims_.horizon, t, obs, acts);
    out[t] = (*this)(obs, acts);
  }
  return out;
}

BonusFn build_bonus(const TabularModel& fitted, const CoreTests& tests,
                    const DistilledDataset& distilled,
                    const OfflineDataset& data, double lambda, double alpha) {
  return BonusFn(fitted, tests, distilled, data, lambda, alpha);
}

double min_core_action_prob(const Policy& behavior, const CoreTests& tests) {
  const Dims& d = tests.dims();
  if (behavior.dims() != d) fail("shape", "dimension mismatch");
  double best = kInf;
  for (int h = 0; h < d.horizon; ++h) {
    auto seqs = tests.core_action_seqs(h);
    long histories = d.history_count(h);
    for (const auto& seq : seqs) {
      for (long t = 0; t < histories; ++t) {
        // Worst-case probability of completing `seq` from history t,
        // minimized over the interleaved observations.
        std::function<double(long, int)> walk = [&](long hist, int step) {
          if (step == static_cast<int>(seq.size())) return 1.0;
          double worst = kInf;
          for (int o = 0; o < d.num_obs; ++o) {
            long infoset = infoset_rank(d, hist, o);
            double p = behavior.prob(h + step + 1, infoset, seq[step]);
            double rest =
                p <= 0.0 ? 0.0
                         : p * walk(infoset * d.num_actions + seq[step],
                                    step + 1);
            worst = std::min(worst, rest);
          }
          return worst;
        };
        best = std::min(best, walk(t, 0));
      }
    }
  }
  return std::isfinite(best) ? best : 1.0;
}

Alg1Result algorithm1(const OfflineDataset& data, const ModelClass& cls,
                      std::span<const Policy> policies,
                      const RewardSpec& reward, const UncertaintySpec& spec,
                      const LearnerParams& params) {
  if (policies.empty()) fail("shape", "empty policy list");
  const Dims& d = cls.dims();
  if (data.behavior.dims() != d || reward.dims() != d)
    fail("shape", "dimension mismatch");
  spec.validate();

  Alg1Result out;
  out.mle = mle_fit(data, cls);
  const TabularModel& fitted = cls.models[out.mle.index];

  out.p_min = params.p_min >= 0.0
                  ? params.p_min
                  : default_p_min(d, data.size(), params.delta);
  out.distilled =
      distill(data, out.mle.fitted_probs, out.p_min, params.split_seed);

  long q_a = 1;
  for (int h = 0; h < d.horizon; ++h)
    q_a = std::max(q_a,
                   static_cast<long>(cls.tests.core_action_seqs(h).size()));
  out.lambda = params.lambda > 0.0
                   ? params.lambda
                   : static_cast<double>(d.horizon) * d.horizon * q_a * q_a;
  if (params.alpha >= 0.0) {
    out.alpha = params.alpha;
  } else {
    double iota = min_core_action_prob(data.behavior, cls.tests);
    if (iota <= 0.0)
      fail("shape",
           "default bonus scale needs behavior coverage of every core action "
           "sequence; set alpha explicitly");
    double gamma = 1.0 / gamma_condition(fitted, cls.tests);
    double beta = std::log(static_cast<double>(cls.size()) / params.delta);
    double dim = static_cast<double>(cls.tests.max_dim());
    out.alpha = q_a * std::sqrt(dim * d.horizon) / (gamma * gamma) *
                    std::sqrt(out.lambda) +
                std::sqrt(std::max(beta, 0.0)) / (iota * gamma);
  }

  BonusFn bonus(fitted, cls.tests, out.distilled, data, out.lambda, out.alpha);
  std::vector<double> bonus_table = bonus.table();

  ScalingInputs inputs;
  inputs.xi = spec.radius;
  inputs.c_b = params.c_b > 0.0
                   ? params.c_b
                   : (spec.set == SetKind::kT ? wellness_cb_exact_t(fitted, spec)
                                              : 1.0);
  if (spec.div == Divergence::kKL) {
    if (params.eta_star > 0.0 && params.lambda_star > 0.0) {
      inputs.eta_star = params.eta_star;
      inputs.lambda_star = params.lambda_star;
    } else {
      double eta = kInf, lam = kInf;
      for (const Policy& pi : policies) {
        EtaLambdaEstimate est =
            estimate_eta_lambda(fitted, pi, reward, spec.radius);
        eta = std::min(eta, est.eta_star);
        lam = std::min(lam, est.lambda_star);
      }
      inputs.eta_star = params.eta_star > 0.0 ? params.eta_star : eta;
      inputs.lambda_star = params.lambda_star > 0.0 ? params.lambda_star : lam;
    }
  }
  out.scale = scaling_constant(spec, inputs);

  double best = -kInf;
  for (std::size_t p = 0; p < policies.size(); ++p) {
    double robust =
        robust_value(fitted, policies[p], reward, spec, params.value_options)
            .value;
    double pessimism = value_table(fitted, policies[p], bonus_table);
    double objective = robust - out.scale * pessimism;
    out.robust_values.push_back(robust);
    out.bonus_values.push_back(pessimism);
    out.objectives.push_back(objective);
    if (objective > best) {
      best = objective;
      out.policy_index = static_cast<long>(p);
    }
  }
  return out;
}

std::vector<long> confidence_set(const OfflineDataset& data,
                                 const ModelClass& cls, double beta) {
  if (data.behavior.dims() != cls.dims()) fail("shape", "dimension mismatch");
  if (beta < 0.0) fail("shape", "negative confidence width");
  std::vector<double> scores(cls.size(), 0.0);
  for (long j = 0; j < cls.size(); ++j) {
    double score = 0.0;
    for (const Trajectory& traj : data.trajectories) {
      double p = traj_prob_dynamics(cls.models[j], traj);
      if (p <= 0.0) {
        score = -kInf;
        break;
      }
      score += std::log(p);
    }
    scores[j] = score;
  }
  double top = *std::max_element(scores.begin(), scores.end());
  std::vector<long> members;
  for (long j = 0; j < cls.size(); ++j)
    if (scores[j] >= top - beta) members.push_back(j);
  return members;
}

Alg2Result algorithm2(const OfflineDataset& data, const ModelClass& cls,
                      std::span<const Policy> policies,
                      const RewardSpec& reward, const UncertaintySpec& spec,
                      double beta, double delta,
                      const RobustValueOptions& value_options) {
  if (policies.empty()) fail("shape", "empty policy list");
  if (reward.dims() != cls.dims()) fail("shape", "dimension mismatch");
  spec.validate();
  if (beta < 0.0)
    beta = std::log(static_cast<double>(cls.size()) / delta);

  Alg2Result out;
  out.confidence = confidence_set(data, cls, beta);
  double best = -kInf;
  for (std::size_t p = 0; p < policies.size(); ++p) {
    std::vector<double> values;
    double worst = kInf;
    for (long j : out.confidence) {
      double v = robust_value(cls.models[j], policies[p], reward, spec,
                              value_options)
                     .value;
      values.push_back(v);
      worst = std::min(worst, v);
    }
    out.member_values.push_back(std::move(values));
    out.objectives.push_back(worst);
    if (worst > best) {
      best = worst;
      out.policy_index = static_cast<long>(p);
    }
  }
  return out;
}

}  // namespace robustpsr
