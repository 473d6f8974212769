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

#include "robustpsr/lp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <ostream>

namespace robustpsr {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kFeasTol = 1e-9;
constexpr long kDenseCap = 50'000;

}  // namespace

void LinearProgram::validate() const {
  if (num_vars <= 0) fail("shape", "lp needs at least one variable");
  if (static_cast<int>(c.size()) != num_vars) fail("shape", "objective size");
  auto check_rows = [&](const std::vector<std::vector<double>>& a,
                        const std::vector<double>& b) {
    if (a.size() != b.size()) fail("shape", "row count mismatch");
    for (const auto& row : a)
      if (static_cast<int>(row.size()) != num_vars)
        fail("shape", "row width mismatch");
  };
  check_rows(a_eq, b_eq);
  check_rows(a_le, b_le);
  if (!lower.empty() && static_cast<int>(lower.size()) != num_vars)
    fail("shape", "bound vector size mismatch");
  long rows = static_cast<long>(a_eq.size() + a_le.size());
  long cols = num_vars + static_cast<long>(a_le.size()) + rows;
  if (rows * cols > kDenseCap) fail("too-large", "dense lp exceeds size cap");
}

void LinearProgram::dump(std::ostream& os) const {
  os << "minimize\n ";
  for (int j = 0; j < num_vars; ++j) os << ' ' << c[j];
  os << "\nsubject to\n";
  for (std::size_t i = 0; i < a_eq.size(); ++i) {
    os << " ";
    for (int j = 0; j < num_vars; ++j) os << ' ' << a_eq[i][j];
    os << " == " << b_eq[i] << '\n';
  }
  for (std::size_t i = 0; i < a_le.size(); ++i) {
    os << " ";
    for (int j = 0; j < num_vars; ++j) os << ' ' << a_le[i][j];
    os << " <= " << b_le[i] << '\n';
  }
  os << "bounds\n ";
  for (int j = 0; j < num_vars; ++j)
    os << ' ' << (lower.empty() ? 0.0 : lower[j]);
  os << '\n';
}

namespace {

/**
 * Dense tableau simplex.  Rows are m x (width+1) with the rhs in column
 * `width`.  `scan` limits the columns eligible to enter the basis (phase 2
 * excludes artificials this way).  The reduced-cost row `cost` and `objective`
 * are maintained incrementally.  Bland's rule: the entering column is the
 * first improving index, the leaving row breaks ratio ties by the smallest
 * basic-variable index, so the method cannot cycle.  Returns false when some
 * entering column has no blocking row (unbounded).
 */
bool run_simplex(std::vector<std::vector<double>>& t, std::vector<int>& basis,
                 std::vector<double>& cost, double& objective, long& iterations,
                 int scan, int width) {
  const int m = static_cast<int>(t.size());
  const long iter_cap = 1'000'000;  // safety net; Bland terminates before this
  for (;;) {
    if (iterations > iter_cap) fail("too-large", "simplex iteration cap hit");
    int enter = -1;
    for (int j = 0; j < scan; ++j) {
      if (cost[j] < -kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return true;  // optimal

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (t[i][enter] > kPivotTol) {
        double ratio = t[i][width] / t[i][enter];
        if (ratio < best_ratio - kPivotTol ||
            (ratio < best_ratio + kPivotTol &&
             (leave < 0 || basis[i] < basis[leave]))) {
          best_ratio = std::min(best_ratio, ratio);
          leave = i;
        }
      }
    }
    if (leave < 0) return false;  // unbounded

    double piv = t[leave][enter];
    for (int j = 0; j <= width; ++j) t[leave][j] /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == leave) continue;
      double f = t[i][enter];
      if (f == 0.0) continue;
      for (int j = 0; j <= width; ++j) t[i][j] -= f * t[leave][j];
      t[i][enter] = 0.0;
    }
    double fc = cost[enter];
    if (fc != 0.0) {
      for (int j = 0; j < width; ++j) cost[j] -= fc * t[leave][j];
      objective -= fc * t[leave][width];
      cost[enter] = 0.0;
    }
    basis[leave] = enter;
    ++iterations;
  }
}

}  // namespace

LpSolution simplex_lp_solve(const LinearProgram& lp) {
  lp.validate();
  const int n = lp.num_vars;
  const int m_eq = static_cast<int>(lp.a_eq.size());
  const int m_le = static_cast<int>(lp.a_le.size());
  const int m = m_eq + m_le;

  // Standard form: substitute x = y + lower (y >= 0), add one slack per
  // inequality row and one artificial per row; artificials double as the
  // phase-1 starting basis.
  const int n_slack = m_le;
  const int width = n + n_slack + m;  // structural + slack + artificial
  std::vector<std::vector<double>> t(m, std::vector<double>(width + 1, 0.0));
  std::vector<int> basis(m);

  auto lower_of = [&](int j) { return lp.lower.empty() ? 0.0 : lp.lower[j]; };

  for (int i = 0; i < m; ++i) {
    const bool is_eq = i < m_eq;
    const auto& row = is_eq ? lp.a_eq[i] : lp.a_le[i - m_eq];
    double rhs = is_eq ? lp.b_eq[i] : lp.b_le[i - m_eq];
    for (int j = 0; j < n; ++j) {
      t[i][j] = row[j];
      rhs -= row[j] * lower_of(j);
    }
    if (!is_eq) t[i][n + (i - m_eq)] = 1.0;
    if (rhs < 0.0) {
      for (int j = 0; j < n + n_slack; ++j) t[i][j] = -t[i][j];
      rhs = -rhs;
    }
    t[i][n + n_slack + i] = 1.0;
    t[i][width] = rhs;
    basis[i] = n + n_slack + i;
  }

  LpSolution sol;

  // Phase 1: minimize the sum of artificials.
  {
    std::vector<double> cost(width, 0.0);
    double objective = 0.0;
    for (int i = 0; i < m; ++i) cost[n + n_slack + i] = 1.0;
    for (int i = 0; i < m; ++i) {  // price out the artificial basis
      for (int j = 0; j < width; ++j) cost[j] -= t[i][j];
      objective -= t[i][width];
    }
    if (!run_simplex(t, basis, cost, objective, sol.iterations, width, width))
      fail("unbounded", "phase-1 reported unbounded; numerical trouble");
    if (-objective > kFeasTol) fail("infeasible", "no feasible point");
    // Drive leftover artificials out of the basis; rows without a structural
    // pivot are redundant and stay parked on a zero-level artificial.
    for (int i = 0; i < m; ++i) {
      if (basis[i] < n + n_slack) continue;
      int piv = -1;
      for (int j = 0; j < n + n_slack; ++j) {
        if (std::abs(t[i][j]) > kPivotTol) {
          piv = j;
          break;
        }
      }
      if (piv < 0) continue;
      double pv = t[i][piv];
      for (int j = 0; j <= width; ++j) t[i][j] /= pv;
      for (int k = 0; k < m; ++k) {
        if (k == i) continue;
        double f = t[k][piv];
        if (f == 0.0) continue;
        for (int j = 0; j <= width; ++j) t[k][j] -= f * t[i][j];
        t[k][piv] = 0.0;
      }
      basis[i] = piv;
    }
  }

  // Phase 2: original objective; artificial columns may not re-enter.
  {
    std::vector<double> cost(width, 0.0);
    double objective = 0.0;
    for (int j = 0; j < n; ++j) cost[j] = lp.c[j];
    for (int i = 0; i < m; ++i) {
      double f = cost[basis[i]];
      if (f != 0.0) {
        for (int j = 0; j < width; ++j) cost[j] -= f * t[i][j];
        objective -= f * t[i][width];
        cost[basis[i]] = 0.0;
      }
    }
    if (!run_simplex(t, basis, cost, objective, sol.iterations, n + n_slack,
                     width))
      fail("unbounded", "objective unbounded below");
  }

  // Recover x = y + lower.
  sol.x.assign(n, 0.0);
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) sol.x[basis[i]] = t[i][width];
  for (int j = 0; j < n; ++j) sol.x[j] += lower_of(j);

  sol.value = 0.0;
  for (int j = 0; j < n; ++j) sol.value += lp.c[j] * sol.x[j];

  // Residuals against the original statement.
  double res = 0.0;
  for (int i = 0; i < m_eq; ++i) {
    double acc = -lp.b_eq[i];
    for (int j = 0; j < n; ++j) acc += lp.a_eq[i][j] * sol.x[j];
    res = std::max(res, std::abs(acc));
  }
  for (int i = 0; i < m_le; ++i) {
    double acc = -lp.b_le[i];
    for (int j = 0; j < n; ++j) acc += lp.a_le[i][j] * sol.x[j];
    res = std::max(res, acc);
  }
  for (int j = 0; j < n; ++j) res = std::max(res, lower_of(j) - sol.x[j]);
  sol.residual = res;
  if (res > kFeasTol) fail("infeasible", "solution residual exceeds tolerance");
  return sol;
}

}  // namespace robustpsr
