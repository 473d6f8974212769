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

#include "robustpsr/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace robustpsr {

namespace {

constexpr double kMembershipSlack = 1e-12;

/// Joint conditional observation law P(o_{1:H} | a_{1:H-1}) as a dense vector
/// over observation-sequence ranks, for one action sequence.
std::vector<double> joint_obs_law(const TabularModel& m,
                                  std::span<const int> acts) {
  const Dims& d = m.dims();
  long n = d.obs_seq_count(d.horizon);
  std::vector<double> law(n, 0.0);
  std::vector<int> obs(d.horizon, 0);
  // Depth-first over observation completions; o_1 runs over the alphabet so
  // models with different initial observations remain comparable.
  std::function<void(int, long, long, double)> walk = [&](int h, long hist,
                                                          long orank,
                                                          double p) {
    if (h == d.horizon) {
      law[orank] = p;
      return;
    }
    long hist2 = extend_history(d, hist, obs[h - 1], acts[h - 1]);
    for (int o = 0; o < d.num_obs; ++o) {
      double po = p * m.transition(h, hist2, o);
      obs[h] = o;
      walk(h + 1, hist2, orank * d.num_obs + o, po);
    }
  };
  for (int o1 = 0; o1 < d.num_obs; ++o1) {
    obs[0] = o1;
    double p1 = (o1 == m.initial_obs()) ? 1.0 : 0.0;
    if (d.horizon == 1) {
      law[o1] = p1;
    } else {
      walk(1, 0, o1, p1);
    }
  }
  return law;
}

}  // namespace

double f_divergence(std::span<const double> p, std::span<const double> q,
                    Divergence div) {
  if (p.size() != q.size()) fail("shape", "distribution size mismatch");
  if (div == Divergence::kTV) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
    return 0.5 * acc;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    acc += p[i] * std::log(p[i] / q[i]);
  }
  return acc;
}

bool membership(const TabularModel& candidate, const TabularModel& center,
                const UncertaintySpec& spec) {
  if (candidate.dims() != center.dims())
    fail("shape", "model dimensions mismatch");
  spec.validate();
  const Dims& d = center.dims();
  double bound = spec.radius + kMembershipSlack;

  if (spec.set == SetKind::kT) {
    if (candidate.initial_obs() != center.initial_obs()) return false;
    for (int h = 1; h < d.horizon; ++h) {
      long rows = d.history_count(h);
      for (long r = 0; r < rows; ++r) {
        double div = f_divergence(candidate.transition_row(h, r),
                                  center.transition_row(h, r), spec.div);
        if (div > bound) return false;
      }
    }
    return true;
  }

  // kP: one joint law per action sequence; flow consistency is automatic for
  // transition-parameterized candidates.
  long seqs = d.action_seq_count(d.horizon - 1);
  std::vector<int> acts;
  for (long s = 0; s < seqs; ++s) {
    unrank_action_seq(d, d.horizon - 1, s, acts);
    auto pc = joint_obs_law(candidate, acts);
    auto pz = joint_obs_law(center, acts);
    if (f_divergence(pc, pz, spec.div) > bound) return false;
  }
  return true;
}

SimplexGrid::SimplexGrid(int resolution, int dim)
    : resolution_(resolution), dim_(dim) {
  if (resolution < 1 || dim < 1) fail("shape", "bad grid parameters");
}

long SimplexGrid::size() const {
  // C(resolution + dim - 1, dim - 1)
  long n = resolution_ + dim_ - 1;
  long k = dim_ - 1;
  long r = 1;
  for (long i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > kEnumerationCap) fail("too-large", "grid exceeds enumeration cap");
  }
  return r;
}

void SimplexGrid::for_each(
    const std::function<void(std::span<const double>)>& fn) const {
  std::vector<int> counts(dim_, 0);
  std::vector<double> point(dim_, 0.0);
  std::function<void(int, int)> rec = [&](int i, int remaining) {
    if (i == dim_ - 1) {
      counts[i] = remaining;
      for (int j = 0; j < dim_; ++j)
        point[j] = static_cast<double>(counts[j]) / resolution_;
      fn(point);
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[i] = c;
      rec(i + 1, remaining - c);
    }
  };
  rec(0, resolution_);
}

std::vector<double> SimplexGrid::round(std::span<const double> p) const {
  if (static_cast<int>(p.size()) != dim_)
    fail("shape", "point dimension mismatch");
  // Largest remainder: floor everything, then hand out the remaining units to
  // the coordinates with the biggest fractional parts.
  std::vector<int> counts(dim_);
  std::vector<std::pair<double, int>> rem(dim_);
  int used = 0;
  for (int i = 0; i < dim_; ++i) {
    double scaled = p[i] * resolution_;
    counts[i] = static_cast<int>(std::floor(scaled));
    rem[i] = {scaled - counts[i], i};
    used += counts[i];
  }
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int k = 0; k < resolution_ - used; ++k) counts[rem[k].second] += 1;
  std::vector<double> out(dim_);
  for (int i = 0; i < dim_; ++i)
    out[i] = static_cast<double>(counts[i]) / resolution_;
  return out;
}

std::vector<std::vector<double>> row_ball(std::span<const double> center_row,
                                          Divergence div, double radius,
                                          const SimplexGrid& grid) {
  if (grid.dim() != static_cast<int>(center_row.size()))
    fail("shape", "grid dimension mismatch");
  std::vector<std::vector<double>> out;
  grid.for_each([&](std::span<const double> q) {
    // Direction matters for KL: the candidate is the perturbed law, the row
    // the center, and balls are {q : D(q, center) <= radius}.
    double dv = f_divergence(q, center_row, div);
    if (dv <= radius + kMembershipSlack) out.emplace_back(q.begin(), q.end());
  });
  return out;
}

namespace {

TabularModel round_model(const TabularModel& center, const SimplexGrid& grid) {
  const Dims& d = center.dims();
  std::vector<std::vector<double>> tables(d.horizon - 1);
  for (int h = 1; h < d.horizon; ++h) {
    long rows = d.history_count(h);
    tables[h - 1].resize(rows * d.num_obs);
    for (long r = 0; r < rows; ++r) {
      auto rounded = grid.round(center.transition_row(h, r));
      std::copy(rounded.begin(), rounded.end(),
                tables[h - 1].begin() + r * d.num_obs);
    }
  }
  return TabularModel(d, center.initial_obs(), std::move(tables));
}

}  // namespace

void for_each_ball_member(const TabularModel& center,
                          const UncertaintySpec& spec, const SimplexGrid& grid,
                          long cap,
                          const std::function<void(const TabularModel&)>& fn) {
  spec.validate();
  const Dims& d = center.dims();
  if (grid.dim() != d.num_obs) fail("shape", "grid dimension mismatch");
  if (d.horizon == 1) {
    fn(center);  // no transition tables, the ball is a single point
    return;
  }

  // Gather per-row candidate lists.  For kT each list is already filtered to
  // the per-row ball; for kP every grid row is a candidate and whole models
  // are filtered below.
  std::vector<std::vector<std::vector<double>>> cands;  // one list per row
  std::vector<std::pair<int, long>> row_of;             // (h, rank)
  double total = 1.0;
  for (int h = 1; h < d.horizon; ++h) {
    long rows = d.history_count(h);
    for (long r = 0; r < rows; ++r) {
      auto list = (spec.set == SetKind::kT)
                      ? row_ball(center.transition_row(h, r), spec.div,
                                 spec.radius, grid)
                      : row_ball(center.transition_row(h, r), spec.div,
                                 std::numeric_limits<double>::infinity(), grid);
      if (list.empty()) return;  // empty ball on this grid
      total *= static_cast<double>(list.size());
      if (total > static_cast<double>(cap))
        fail("too-large", "ball enumeration exceeds cap");
      cands.push_back(std::move(list));
      row_of.emplace_back(h, r);
    }
  }

  // Odometer over the Cartesian product; rows are patched in place.
  TabularModel work = center;
  std::vector<std::size_t> idx(cands.size(), 0);
  auto apply_row = [&](std::size_t i) {
    auto [h, r] = row_of[i];
    auto dst = work.mutable_transition_row(h, r);
    const auto& src = cands[i][idx[i]];
    std::copy(src.begin(), src.end(), dst.begin());
  };
  for (std::size_t i = 0; i < cands.size(); ++i) apply_row(i);
  for (;;) {
    if (spec.set == SetKind::kT || membership(work, center, spec)) fn(work);
    std::size_t i = 0;
    for (; i < idx.size(); ++i) {
      if (++idx[i] < cands[i].size()) {
        apply_row(i);
        break;
      }
      idx[i] = 0;
      apply_row(i);
    }
    if (i == idx.size()) break;
  }
}

BallEnumeration enumerate_ball(const TabularModel& center,
                               const UncertaintySpec& spec,
                               const SimplexGrid& grid, long cap) {
  BallEnumeration out;
  for_each_ball_member(center, spec, grid, cap,
                       [&](const TabularModel& m) { out.members.push_back(m); });
  if (out.members.empty()) {
    // Grid balls can be empty near simplex boundaries (KL especially); emit
    // the grid-rounded center with a warning flag instead of nothing.
    out.members.push_back(round_model(center, grid));
    out.rounded_center_fallback = true;
  }
  return out;
}

}  // namespace robustpsr
