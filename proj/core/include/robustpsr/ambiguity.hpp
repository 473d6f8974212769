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

#include "robustpsr/process.hpp"

namespace robustpsr {

enum class SetKind { kT, kP };
enum class Divergence { kTV, kKL };

/**
 * Uncertainty set descriptor.  The radius applies
 *  - per conditional next-observation row for kT (rectangular per history),
 *  - per joint conditional observation law, one action sequence at a time,
 *    for kP (with the flow-consistency constraints of TabularModel).
 *
 * Total variation here is the half-l1 convention: TV(p, q) = 0.5 * sum|p-q|.
 */
struct UncertaintySpec {
  SetKind set = SetKind::kT;
  Divergence div = Divergence::kTV;
  double radius = 0.0;

  void validate() const {
    if (radius < 0.0) fail("shape", "radius must be nonnegative");
  }
};

/// f-divergence between two distributions on the same support.
/// TV = 0.5 sum |p - q|; KL = sum p log(p/q) with 0 log 0 = 0 and +inf when p
/// puts mass outside q's support.
double f_divergence(std::span<const double> p, std::span<const double> q,
                    Divergence div);

/// Membership of `candidate` in the ball of `spec` around `center`.
/// Uses a 1e-12 comparison slack so centers and exact-boundary points test
/// true under floating point.
bool membership(const TabularModel& candidate, const TabularModel& center,
                const UncertaintySpec& spec);

/**
 * Regular grid on the probability simplex: all distributions with coordinates
 * that are integer multiples of 1/resolution.
 */
class SimplexGrid {
 public:
  SimplexGrid(int resolution, int dim);

  int resolution() const { return resolution_; }
  int dim() const { return dim_; }

  /// Number of grid points: C(resolution + dim - 1, dim - 1).
  long size() const;

  /// Visits every grid point.
  void for_each(const std::function<void(std::span<const double>)>& fn) const;

  /// Nearest grid point by largest-remainder rounding (keeps the sum exact).
  std::vector<double> round(std::span<const double> p) const;

 private:
  int resolution_;
  int dim_;
};

/// Grid rows within `radius` of `center_row` (divergence of candidate w.r.t.
/// the center).  May be empty when the center is off-grid and the radius is
/// small.  Building block of the rectangular brute-force oracles.
std::vector<std::vector<double>> row_ball(std::span<const double> center_row,
                                          Divergence div, double radius,
                                          const SimplexGrid& grid);

struct BallEnumeration {
  std::vector<TabularModel> members;
  /// Set when no grid model passed membership; `members` then holds only the
  /// grid-rounded center (which may itself lie outside the ball), emitted so
  /// callers are never handed an empty stream silently.
  bool rounded_center_fallback = false;
};

/**
 * Enumerates models on the row grid that belong to the ball.
 *
 * kT: the ball is rectangular, so per-history candidate rows are enumerated
 * independently and combined lazily as a Cartesian product.  kP: every
 * all-rows-on-grid model is generated and filtered through membership.
 * The total number of visited models is capped ("too-large").
 */
void for_each_ball_member(const TabularModel& center,
                          const UncertaintySpec& spec, const SimplexGrid& grid,
                          long cap,
                          const std::function<void(const TabularModel&)>& fn);

/// Materializing wrapper around for_each_ball_member with the rounded-center
/// fallback described above.
BallEnumeration enumerate_ball(const TabularModel& center,
                               const UncertaintySpec& spec,
                               const SimplexGrid& grid,
                               long cap = kEnumerationCap);

}  // namespace robustpsr
