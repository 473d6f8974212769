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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robustpsr/ambiguity.hpp"
#include "robustpsr/instances.hpp"
#include "robustpsr/learner.hpp"

namespace robustpsr {

/// Learner parameter overrides; a negative value means "use the default".
struct ParamOverrides {
  double p_min = -1.0;
  double alpha = -1.0;
  double lambda = -1.0;
  double beta = -1.0;
  double delta = 0.1;
};

/**
 * A dataset sweep: which instance to run, the N schedule, seeds per N, the
 * algorithm, and parameter overrides.  The instance comes either from a
 * built-in generator ("ring2" or "ring2-family") or from JSON files.
 */
struct ExperimentConfig {
  std::string generator;
  std::string model_class_file;
  std::string behavior_file;
  std::vector<std::string> policy_files;
  std::string reward_file;
  /// Optional when the generator ships its own uncertainty spec.
  std::optional<UncertaintySpec> spec;
  std::vector<long> schedule;
  long seeds = 1;
  std::uint64_t master_seed = 1;
  int algorithm = 1;
  ParamOverrides overrides;
  std::string output_path;

  /// Enforces: schedule nonempty and strictly increasing with entries >= 1,
  /// seeds >= 1, algorithm in {1, 2}, known generator, file fields present
  /// when no generator is named, delta in (0, 1).
  void validate() const;
};

ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);

/// Materializes the instance a config points at (generator or files).
ExperimentInstance load_instance(const ExperimentConfig& config);

/**
 * One (N, seed) cell of a sweep.  `theta_hat` is the MLE index (-1 for the
 * confidence-set algorithm, which keeps no point estimate), `dg_size` the
 * retained distilled-dataset size (0 for algorithm 2), `conf_size` the
 * confidence-set size (0 for algorithm 1).  `lcb_valid` records, for
 * algorithm 1, that every candidate's pessimistic objective lower-bounds its
 * exact robust value under the data-generating model; for algorithm 2, that
 * the data-generating model stayed inside the confidence set.  On a module
 * error the row carries the error code, gap NaN, and -1 sizes.
 */
struct SweepRow {
  long n = 0;
  long seed = 0;
  double gap = 0.0;
  long dg_size = 0;
  long theta_hat = -1;
  long conf_size = 0;
  bool lcb_valid = false;
  double ms = 0.0;
  std::string error;
};

struct SweepResult {
  /// Rows sorted by (n, seed); one per schedule cell.
  std::vector<SweepRow> rows;
  /// Exact robust value of each candidate policy under the data-generating
  /// model (the referee the gaps are measured against).
  std::vector<double> referee;
  bool any_error = false;
};

/**
 * Runs the configured sweep.  Each row samples a dataset of its N from the
 * class's designated data-generating model under the behavior policy (with a
 * counter-derived per-row seed), runs the chosen algorithm, and scores the
 * selected policy's suboptimality against exact robust values.  Rows are
 * computed in a thread pool (capped by ROBUSTPSR_THREADS) but the result is
 * deterministic: every row depends only on the config and its own derived
 * seed.  A module error records an error row instead of aborting the sweep.
 */
SweepResult run_sweep(const ExperimentConfig& config);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/**
 * Least-squares fit of log median-gap against log N.  Error rows and
 * nonpositive medians are excluded; fewer than three surviving N values fail
 * with "insufficient-points".
 */
SlopeFit fit_slope(std::span<const SweepRow> rows);

/**
 * CSV with header N,seed,gap,dg_size,theta_hat,conf_size,lcb_valid,ms, rows
 * sorted by (N, seed), floats at 17 significant digits.  Wall time is zeroed
 * unless include_timing is set, so that repeated runs are byte-identical.
 */
std::string csv_text(std::span<const SweepRow> rows,
                     bool include_timing = false);

/// Writes csv_text to a temporary file then renames it over the target, so a
/// concurrent reader never sees a partial file.
void emit_csv(std::span<const SweepRow> rows, const std::string& path,
              bool include_timing = false);

std::vector<SweepRow> parse_csv(const std::string& text);

/// Pool width for a sweep of `rows` cells: min(rows, hardware threads,
/// ROBUSTPSR_THREADS when the env var is set to a positive integer).
int sweep_thread_count(long rows);

}  // namespace robustpsr
