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

#include <iosfwd>
#include <vector>

#include "robustpsr/common.hpp"

namespace robustpsr {

/**
 * Dense linear program
 *
 *   minimize    c . x
 *   subject to  a_eq x  = b_eq
 *               a_le x <= b_le
 *               x >= lower    (componentwise; defaults to 0)
 *
 * Matrices are dense row-major.  The dense entry count (rows+cols products)
 * is capped at 5e4; larger problems raise "too-large".
 */
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> c;
  std::vector<std::vector<double>> a_eq;
  std::vector<double> b_eq;
  std::vector<std::vector<double>> a_le;
  std::vector<double> b_le;
  std::vector<double> lower;  // empty means all zeros

  void validate() const;

  /// Plain-text dump of the full dense program, for debugging.
  void dump(std::ostream& os) const;
};

struct LpSolution {
  double value = 0.0;
  std::vector<double> x;
  long iterations = 0;
  /// max violation over equality rows, inequality rows and bounds.
  double residual = 0.0;
};

/**
 * Two-phase primal simplex on the dense tableau with Bland's pivoting rule
 * (smallest-index entering and leaving), which precludes cycling.  Raises
 * "infeasible" / "unbounded" as detected; the returned point satisfies all
 * constraints within 1e-9.
 */
LpSolution simplex_lp_solve(const LinearProgram& lp);

}  // namespace robustpsr
