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

#include "robustpsr/duals.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <limits>

namespace robustpsr {

namespace {

constexpr double kLambdaFloor = 1e-8;

void check_dual_inputs(std::span<const double> p0,
                       std::span<const double> loss, double xi) {
  if (p0.empty() || p0.size() != loss.size())
    fail("shape", "distribution / loss size mismatch");
  if (xi < 0.0 || std::isnan(xi)) fail("shape", "radius must be nonnegative");
  double sum = 0.0;
  for (double p : p0) {
    if (p < 0.0 || std::isnan(p)) fail("shape", "p0 must be a distribution");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail("shape", "p0 must sum to 1");
  for (double l : loss)
    if (std::isnan(l) || std::isinf(l)) fail("shape", "loss must be finite");
}

/// Golden-section maximization of a concave scalar function on [lo, hi].
/// Returns (argmax, max).  Bracket shrinks below `tol`.
std::pair<double, double> golden_max(const std::function<double(double)>& g,
                                     double lo, double hi, double tol,
                                     long* evals = nullptr) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;   // 0.618...
  const double invphi2 = (3.0 - std::sqrt(5.0)) / 2.0;  // 0.382...
  double a = lo, b = hi;
  double h = b - a;
  double c = a + invphi2 * h, d = a + invphi * h;
  double fc = g(c), fd = g(d);
  long n = 2;
  while (h > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      h = b - a;
      c = a + invphi2 * h;
      fc = g(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      h = b - a;
      d = a + invphi * h;
      fd = g(d);
    }
    ++n;
  }
  if (evals) *evals += n;
  double x = (fc >= fd) ? c : d;
  double fx = std::max(fc, fd);
  // Also consider the brackets themselves so boundary maxima are not missed.
  double fa = g(a), fb = g(b);
  if (fa > fx) {
    x = a;
    fx = fa;
  }
  if (fb > fx) {
    x = b;
    fx = fb;
  }
  if (evals) *evals += 2;
  return {x, fx};
}

}  // namespace

DualSolution tv_dual_expectation(std::span<const double> p0,
                                 std::span<const double> loss, double xi) {
  check_dual_inputs(p0, loss, xi);
  double lmin = *std::min_element(loss.begin(), loss.end());
  double lmax = *std::max_element(loss.begin(), loss.end());

  // Piecewise-linear concave in lambda with knots at the loss values; the
  // slope is +1 below the smallest loss and 1 - P(loss <= lambda) - xi above
  // the smallest, so some knot attains the maximum.
  DualSolution out;
  out.degenerate = (lmax == lmin);
  out.value = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < loss.size(); ++k) {
    double lam = loss[k];
    double exp_part = 0.0;
    for (std::size_t i = 0; i < p0.size(); ++i)
      exp_part += p0[i] * std::max(lam - loss[i], 0.0);
    double obj = lam - exp_part - xi * std::max(lam - lmin, 0.0);
    ++out.iterations;
    if (obj > out.value) {
      out.value = obj;
      out.multiplier = lam;
    }
  }
  return out;
}

DualSolution kl_dual_expectation(std::span<const double> p0,
                                 std::span<const double> loss, double xi,
                                 double tol) {
  check_dual_inputs(p0, loss, xi);
  DualSolution out;
  if (xi == 0.0) {
    for (std::size_t i = 0; i < p0.size(); ++i) out.value += p0[i] * loss[i];
    return out;
  }

  // Support statistics; the ball keeps all mass inside p0's support.
  double m = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p0.size(); ++i) {
    if (p0[i] <= 0.0) continue;
    m = std::min(m, loss[i]);
    hi = std::max(hi, loss[i]);
  }
  if (!(hi > m)) {  // constant loss on support
    out.value = m;
    out.degenerate = true;
    return out;
  }

  auto objective = [&](double lam) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p0.size(); ++i) {
      if (p0[i] <= 0.0) continue;
      acc += p0[i] * std::exp(-(loss[i] - m) / lam);
    }
    return m - lam * std::log(acc) - lam * xi;
  };
  double lam_hi = (hi - m) / xi + 1.0;
  auto [lam, val] = golden_max(objective, kLambdaFloor, lam_hi, tol,
                               &out.iterations);
  out.value = val;
  out.multiplier = lam;
  out.degenerate = lam <= kLambdaFloor * 2.0;
  // The lambda -> 0 limit of the objective is the support minimum; make sure
  // shrinking brackets never report less than that limit.
  if (out.degenerate && m > out.value) out.value = m;
  return out;
}

namespace {

/// Shared dense layout of the joint-law problems.  x_H ranks are
/// action-sequence-major: rank = a_rank * O^{H-1} + o_rank, with a_rank over
/// a_{1:H-1} and o_rank over o_{2:H} (step-major, last step least
/// significant).  tau_{H-1} ranks drop the last observation:
/// a_rank * O^{H-2} + o_rank / O.
struct JointLayout {
  Dims dims;
  long n_aseq = 1;   // A^{H-1}
  long n_oseq = 1;   // O^{H-1}
  long n_x = 1;      // n_aseq * n_oseq
  long n_opre = 1;   // O^{H-2}
  long n_tau = 1;    // n_aseq * n_opre

  explicit JointLayout(const Dims& d) : dims(d) {
    n_aseq = d.action_seq_count(d.horizon - 1);
    n_oseq = d.obs_seq_count(d.horizon - 1);
    n_x = n_aseq * n_oseq;
    n_opre = d.obs_seq_count(d.horizon - 2);
    n_tau = n_aseq * n_opre;
    if (n_x > kEnumerationCap) fail("too-large", "joint law exceeds cap");
  }
};

/// Walks every (a_{1:H-1}, o_{2:H}) completion, reporting the compact x_H
/// rank, the real tau_{H-1} history rank, the last transition row's history
/// rank owner, the dynamics product and the action-prefix policy product.
/// fn(x_rank, hist_rank_of_tau_{H-1}, infoset_rank_of_x_H, dyn, pol).
void walk_joint(const TabularModel& model, const Policy& policy,
                const std::function<void(long, long, long, double, double)>& fn) {
  const Dims& d = model.dims();
  const JointLayout lay(d);
  std::vector<int> obs(d.horizon, 0);
  obs[0] = model.initial_obs();

  std::function<void(int, long, long, long, double, double)> rec =
      [&](int h, long hist, long arank, long orank, double dyn, double pol) {
        // h: next action index to choose (1-based).
        long x = infoset_rank(d, hist, obs[h - 1]);
        for (int a = 0; a < d.num_actions; ++a) {
          double pol2 = pol * policy.prob(h, x, a);
          long hist2 = extend_history(d, hist, obs[h - 1], a);
          long arank2 = arank * d.num_actions + a;
          if (h == d.horizon - 1) {
            for (int o = 0; o < d.num_obs; ++o) {
              double dyn2 = dyn * model.transition(h, hist2, o);
              long xrank = arank2 * lay.n_oseq + orank * d.num_obs + o;
              long xinfo = infoset_rank(d, hist2, o);
              fn(xrank, hist2, xinfo, dyn2, pol2);
            }
          } else {
            for (int o = 0; o < d.num_obs; ++o) {
              double dyn2 = dyn * model.transition(h, hist2, o);
              obs[h] = o;
              rec(h + 1, hist2, arank2, orank * d.num_obs + o, dyn2, pol2);
            }
          }
        }
      };
  if (d.horizon >= 2) rec(1, 0, 0, 0, 1.0, 1.0);
}

}  // namespace

std::vector<double> terminal_policy_weights(const TabularModel& model,
                                            const Policy& policy,
                                            const RewardSpec& reward) {
  const Dims& d = model.dims();
  if (policy.dims() != d || reward.dims() != d)
    fail("shape", "dimension mismatch");
  const JointLayout lay(d);
  std::vector<double> f(lay.n_x, 0.0);
  if (d.horizon == 1) {
    long x = model.initial_obs();
    double acc = 0.0;
    for (int a = 0; a < d.num_actions; ++a)
      acc += policy.prob(1, x, a) *
             reward.at(step_code(d, model.initial_obs(), a));
    f[0] = acc;
    return f;
  }
  walk_joint(model, policy,
             [&](long xrank, long hist_tail, long xinfo, double /*dyn*/,
                 double pol) {
               // hist_tail is the rank of tau_{H-1}; the last step closes the
               // trajectory with every final action.
               double acc = 0.0;
               int last_obs = static_cast<int>(xinfo % model.dims().num_obs);
               for (int a = 0; a < model.dims().num_actions; ++a) {
                 long traj = extend_history(model.dims(), hist_tail, last_obs, a);
                 acc += policy.prob(model.dims().horizon, xinfo, a) *
                        reward.at(traj);
               }
               f[xrank] = pol * acc;
             });
  return f;
}

std::vector<double> nominal_joint_law(const TabularModel& model) {
  const Dims& d = model.dims();
  const JointLayout lay(d);
  std::vector<double> p(lay.n_x, 0.0);
  if (d.horizon == 1) {
    p[0] = 1.0;
    return p;
  }
  Policy uni = uniform_policy(d);  // policy factors unused below
  walk_joint(model, uni,
             [&](long xrank, long, long, double dyn, double) {
               p[xrank] = dyn;
             });
  return p;
}

PTvPrimalResult p_tv_primal(const TabularModel& model, const Policy& policy,
                            const RewardSpec& reward, double xi,
                            TvBudget budget_kind) {
  const Dims& d = model.dims();
  if (policy.dims() != d || reward.dims() != d)
    fail("shape", "dimension mismatch");
  if (xi < 0.0) fail("shape", "radius must be nonnegative");

  auto f = terminal_policy_weights(model, policy, reward);
  PTvPrimalResult out;
  if (d.horizon == 1) {  // no transition uncertainty at all
    out.value = f[0];
    return out;
  }
  const JointLayout lay(d);
  auto pstar = nominal_joint_law(model);
  const double budget = (budget_kind == TvBudget::kHalfL1) ? 2.0 * xi : xi;

  // Variable blocks: P(x_h) for h = 2..H (action-major compact ranks), then
  // the deviation slacks s(x_H).
  std::vector<long> offset(d.horizon + 1, 0);
  long nv = 0;
  for (int h = 2; h <= d.horizon; ++h) {
    offset[h] = nv;
    nv += d.action_seq_count(h - 1) * d.obs_seq_count(h - 1);
  }
  const long s_off = nv;
  nv += lay.n_x;

  LinearProgram lp;
  lp.num_vars = static_cast<int>(nv);
  lp.c.assign(nv, 0.0);
  for (long x = 0; x < lay.n_x; ++x) lp.c[offset[d.horizon] + x] = f[x];

  // Root mass: each first action carries total mass 1.
  for (int a1 = 0; a1 < d.num_actions; ++a1) {
    std::vector<double> row(nv, 0.0);
    for (int o2 = 0; o2 < d.num_obs; ++o2)
      row[offset[2] + static_cast<long>(a1) * d.num_obs + o2] = 1.0;
    lp.a_eq.push_back(std::move(row));
    lp.b_eq.push_back(1.0);
  }
  // Flow: summing P(x_{h+1}) over the next observation returns P(x_h),
  // for every action extension.
  for (int h = 2; h < d.horizon; ++h) {
    long na = d.action_seq_count(h - 1);
    long no = d.obs_seq_count(h - 1);
    for (long ar = 0; ar < na; ++ar) {
      for (long orank = 0; orank < no; ++orank) {
        long parent = offset[h] + ar * no + orank;
        for (int a = 0; a < d.num_actions; ++a) {
          std::vector<double> row(nv, 0.0);
          long ar2 = ar * d.num_actions + a;
          for (int o = 0; o < d.num_obs; ++o)
            row[offset[h + 1] + (ar2 * no * d.num_obs) + orank * d.num_obs + o] =
                1.0;
          row[parent] -= 1.0;
          lp.a_eq.push_back(std::move(row));
          lp.b_eq.push_back(0.0);
        }
      }
    }
  }
  // |P - P*| <= s.
  for (long x = 0; x < lay.n_x; ++x) {
    std::vector<double> row(nv, 0.0);
    row[offset[d.horizon] + x] = 1.0;
    row[s_off + x] = -1.0;
    lp.a_le.push_back(row);
    lp.b_le.push_back(pstar[x]);
    row[offset[d.horizon] + x] = -1.0;
    lp.a_le.push_back(std::move(row));
    lp.b_le.push_back(-pstar[x]);
  }
  // Per-action-sequence deviation budget.
  for (long ar = 0; ar < lay.n_aseq; ++ar) {
    std::vector<double> row(nv, 0.0);
    for (long orank = 0; orank < lay.n_oseq; ++orank)
      row[s_off + ar * lay.n_oseq + orank] = 1.0;
    lp.a_le.push_back(std::move(row));
    lp.b_le.push_back(budget);
  }

  out.lp = simplex_lp_solve(lp);
  out.value = out.lp.value;
  out.worst_law.assign(lay.n_x, 0.0);
  for (long x = 0; x < lay.n_x; ++x)
    out.worst_law[x] = out.lp.x[offset[d.horizon] + x];
  return out;
}

DualSolution p_tv_dual(const TabularModel& model, const Policy& policy,
                       const RewardSpec& reward, double xi,
                       const PTvOptions& options) {
  const Dims& d = model.dims();
  if (policy.dims() != d || reward.dims() != d)
    fail("shape", "dimension mismatch");
  if (xi < 0.0) fail("shape", "radius must be nonnegative");

  auto f = terminal_policy_weights(model, policy, reward);
  DualSolution out;
  if (d.horizon == 1 || xi == 0.0) {
    auto pstar = nominal_joint_law(model);
    for (std::size_t i = 0; i < f.size(); ++i) out.value += f[i] * pstar[i];
    return out;
  }
  const JointLayout lay(d);
  auto pstar = nominal_joint_law(model);
  const double budget = (options.budget == TvBudget::kHalfL1) ? 2.0 * xi : xi;

  // Deviation variables nu(x_H), the multiplier difference of the two
  // absolute-deviation rows of the primal.  Every other multiplier of the
  // linear program is eliminated at its optimum: the per-sequence budget
  // multiplier becomes max |nu| over the sequence's terminals, and the flow
  // multipliers collapse into the pessimistic backward recursion below, so
  // any nu yields a feasible dual point and its objective is a certified
  // lower bound on the primal optimum.
  const int H = d.horizon, A = d.num_actions, O = d.num_obs;
  std::vector<long> pow_a(H), pow_o(H);
  pow_a[0] = pow_o[0] = 1;
  for (int l = 1; l < H; ++l) {
    pow_a[l] = pow_a[l - 1] * A;
    pow_o[l] = pow_o[l - 1] * O;
  }

  // W on (history, action) pairs per level l = 1..H-1; rank = ar * O^{l-1}
  // + obs-prefix rank.  Top level: W = min_{o_H}(f + nu); descending:
  // W(x_{l}, a_l) = min_{o_{l+1}} sum_{a_{l+1}} W(x_{l+1}, a_{l+1}); the
  // root term of the dual objective is sum_{a_1} W(a_1).
  std::vector<std::vector<double>> pair_w(H);
  std::vector<std::vector<int>> pair_obs(H);  // argmin observation per pair
  for (int l = 1; l < H; ++l) {
    pair_w[l].assign(pow_a[l] * pow_o[l - 1], 0.0);
    pair_obs[l].assign(pow_a[l] * pow_o[l - 1], 0);
  }

  auto backward = [&](const std::vector<double>& nu) {
    auto& top = pair_w[H - 1];
    for (long pr = 0; pr < static_cast<long>(top.size()); ++pr) {
      long ar = pr / lay.n_opre, op = pr % lay.n_opre;
      long base = ar * lay.n_oseq + op * O;
      double best = f[base] + nu[base];
      int bo = 0;
      for (int o = 1; o < O; ++o) {
        double t = f[base + o] + nu[base + o];
        if (t < best) {
          best = t;
          bo = o;
        }
      }
      top[pr] = best;
      pair_obs[H - 1][pr] = bo;
    }
    for (int l = H - 2; l >= 1; --l) {
      const auto& child = pair_w[l + 1];
      for (long pr = 0; pr < static_cast<long>(pair_w[l].size()); ++pr) {
        long ar = pr / pow_o[l - 1], orp = pr % pow_o[l - 1];
        double best = std::numeric_limits<double>::infinity();
        int bo = 0;
        for (int o = 0; o < O; ++o) {
          long child_or = orp * O + o;
          double s = 0.0;
          for (int a = 0; a < A; ++a)
            s += child[(ar * A + a) * pow_o[l] + child_or];
          if (s < best) {
            best = s;
            bo = o;
          }
        }
        pair_w[l][pr] = best;
        pair_obs[l][pr] = bo;
      }
    }
    double v = 0.0;
    for (int a1 = 0; a1 < A; ++a1) v += pair_w[1][a1];
    return v;
  };

  std::vector<double> grad(lay.n_x);
  // Marks the terminal picked by the stored argmin observations along every
  // action branch below pair (level, ar, orank); each contributes +1.
  auto mark = [&](auto&& self, int level, long ar, long orank) -> void {
    int o = pair_obs[level][ar * pow_o[level - 1] + orank];
    if (level == H - 1) {
      grad[ar * lay.n_oseq + orank * O + o] += 1.0;
      return;
    }
    long child_or = orank * O + o;
    for (int a = 0; a < A; ++a)
      self(self, level + 1, ar * A + a, child_or);
  };

  // The iterate box is a stability device only (any nu is dual feasible);
  // it comfortably contains the closed-form maximizers seen in practice.
  double fmin = *std::min_element(f.begin(), f.end());
  double fmax = *std::max_element(f.begin(), f.end());
  const double box = (fmax - fmin) + std::max(std::abs(fmax), std::abs(fmin)) + 1.0;

  std::vector<double> nu(lay.n_x, 0.0);
  std::vector<double> best_nu = nu;
  double best_value = -std::numeric_limits<double>::infinity();

  auto iterate = [&](bool update) {
    double v = backward(nu);
    std::fill(grad.begin(), grad.end(), 0.0);
    for (int a1 = 0; a1 < A; ++a1) mark(mark, 1, a1, 0);
    for (long x = 0; x < lay.n_x; ++x) {
      v -= pstar[x] * nu[x];
      grad[x] -= pstar[x];
    }
    for (long ar = 0; ar < lay.n_aseq; ++ar) {
      double mx = 0.0;
      long arg = ar * lay.n_oseq;
      for (long orank = 0; orank < lay.n_oseq; ++orank) {
        double t = std::abs(nu[ar * lay.n_oseq + orank]);
        if (t > mx) {
          mx = t;
          arg = ar * lay.n_oseq + orank;
        }
      }
      v -= budget * mx;
      if (update && mx > 0.0)
        grad[arg] -= budget * (nu[arg] > 0.0 ? 1.0 : -1.0);
    }
    if (v > best_value) {
      best_value = v;
      best_nu = nu;
    }
    return v;
  };

  for (long it = 1; it <= options.iterations; ++it) {
    iterate(true);
    double step = options.step / std::sqrt(static_cast<double>(it));
    for (long x = 0; x < lay.n_x; ++x)
      nu[x] = std::clamp(nu[x] + step * grad[x], -box, box);
    ++out.iterations;
  }
  iterate(false);

  out.value = best_value;
  // Equivalent box-form multipliers for diagnostics: gamma >= 0 over
  // terminals and lambda over (x_{H-1}, a_{H-1}) pairs.
  backward(best_nu);
  out.gamma.assign(lay.n_x, 0.0);
  out.lambda.assign(lay.n_tau, 0.0);
  for (long tr = 0; tr < lay.n_tau; ++tr) out.lambda[tr] = -pair_w[H - 1][tr];
  for (long x = 0; x < lay.n_x; ++x) {
    long ar = x / lay.n_oseq;
    long tr = ar * lay.n_opre + (x % lay.n_oseq) / O;
    out.gamma[x] = f[x] + best_nu[x] - pair_w[H - 1][tr];
  }
  return out;
}

DualSolution p_kl_dual(const TabularModel& model, const Policy& policy,
                       const RewardSpec& reward, double xi, double tol) {
  const Dims& d = model.dims();
  if (policy.dims() != d || reward.dims() != d)
    fail("shape", "dimension mismatch");
  if (xi < 0.0) fail("shape", "radius must be nonnegative");

  auto f = terminal_policy_weights(model, policy, reward);
  DualSolution out;
  if (d.horizon == 1 || xi == 0.0) {
    auto pstar = nominal_joint_law(model);
    for (std::size_t i = 0; i < f.size(); ++i) out.value += f[i] * pstar[i];
    return out;
  }
  const JointLayout lay(d);

  // Gather, per action sequence, the list of tau_{H-1} prefixes with their
  // nominal prefix mass and final transition row.
  struct Prefix {
    double mass;       // P*(x_{H-1}) for this action sequence
    long hist;         // real rank of tau_{H-1}
    long x_base;       // compact x_H rank of (prefix, o_H = 0)
  };
  std::vector<std::vector<Prefix>> seq(lay.n_aseq);
  walk_joint(model, uniform_policy(d),
             [&](long xrank, long hist_tail, long, double, double) {
               if (xrank % d.num_obs != 0) return;  // one entry per prefix
               long ar = xrank / lay.n_oseq;
               seq[ar].push_back({0.0, hist_tail, xrank});
             });
  // Prefix masses: product of transitions up to H-1 (drop the last factor).
  for (long ar = 0; ar < lay.n_aseq; ++ar) {
    for (auto& pre : seq[ar]) {
      std::vector<int> obs, acts;
      unrank_history(d, d.horizon - 1, pre.hist, obs, acts);
      pre.mass = history_obs_prob(model, obs, acts, d.horizon - 1);
    }
  }

  out.eta.assign(lay.n_aseq, 0.0);
  double fmin = *std::min_element(f.begin(), f.end());
  double fmax = *std::max_element(f.begin(), f.end());
  double eta_hi = (fmax - fmin) / xi + 1.0;

  for (long ar = 0; ar < lay.n_aseq; ++ar) {
    // Support minimum per prefix for the shifted log-sum-exp.
    const auto& prefixes = seq[ar];
    std::vector<double> mins(prefixes.size(), 0.0);
    bool constant = true;
    for (std::size_t i = 0; i < prefixes.size(); ++i) {
      double mn = std::numeric_limits<double>::infinity();
      double mx = -mn;
      auto row = model.transition_row(d.horizon - 1, prefixes[i].hist);
      for (int o = 0; o < d.num_obs; ++o) {
        if (row[o] <= 0.0) continue;
        double fx = f[prefixes[i].x_base + o];
        mn = std::min(mn, fx);
        mx = std::max(mx, fx);
      }
      mins[i] = mn;
      if (mx > mn + 0.0) constant = false;
    }
    auto g = [&](double eta) {
      double acc = 0.0;
      for (std::size_t i = 0; i < prefixes.size(); ++i) {
        if (prefixes[i].mass <= 0.0) continue;
        auto row = model.transition_row(d.horizon - 1, prefixes[i].hist);
        double e = 0.0;
        for (int o = 0; o < d.num_obs; ++o) {
          if (row[o] <= 0.0) continue;
          e += row[o] * std::exp(-(f[prefixes[i].x_base + o] - mins[i]) / eta);
        }
        acc += prefixes[i].mass * (mins[i] - eta * std::log(e));
      }
      return acc - eta * xi;
    };
    if (constant) {
      double v = 0.0;
      for (std::size_t i = 0; i < prefixes.size(); ++i)
        v += prefixes[i].mass * mins[i];
      out.value += v;
      out.eta[ar] = kLambdaFloor;
      out.degenerate = true;
      continue;
    }
    auto [eta, val] = golden_max(g, kLambdaFloor, eta_hi, tol, &out.iterations);
    // Guard against bracket underestimation of the eta -> 0 limit.
    double limit0 = 0.0;
    for (std::size_t i = 0; i < prefixes.size(); ++i)
      limit0 += prefixes[i].mass * mins[i];
    if (eta <= kLambdaFloor * 2.0) {
      out.degenerate = true;
      val = std::max(val, limit0);
    }
    out.value += val;
    out.eta[ar] = eta;
  }
  return out;
}

}  // namespace robustpsr
