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

// Command line front end: robust-value, fit, sweep, validate-duals.
// Exit codes: 0 success, 1 configuration error, 2 computation/row error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "robustpsr/ambiguity.hpp"
#include "robustpsr/diagnostics.hpp"
#include "robustpsr/duals.hpp"
#include "robustpsr/harness.hpp"
#include "robustpsr/io.hpp"
#include "robustpsr/learner.hpp"
#include "robustpsr/robust_values.hpp"

namespace {

using nlohmann::json;
using namespace robustpsr;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRow = 2;

json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

UncertaintySpec spec_from_flags(const std::string& spec_file,
                                const std::string& set_name,
                                const std::string& div_name, double xi) {
  if (!spec_file.empty()) return spec_from_json(read_text_file(spec_file));
  UncertaintySpec spec;
  if (set_name == "T" || set_name == "t")
    spec.set = SetKind::kT;
  else if (set_name == "P" || set_name == "p")
    spec.set = SetKind::kP;
  else
    fail("shape", "--set must be T or P");
  if (div_name == "tv")
    spec.div = Divergence::kTV;
  else if (div_name == "kl")
    spec.div = Divergence::kKL;
  else
    fail("shape", "--div must be tv or kl");
  spec.radius = xi;
  spec.validate();
  return spec;
}

int run_robust_value(const std::string& model_file,
                     const std::string& policy_file,
                     const std::string& reward_file,
                     const std::string& spec_file, const std::string& set_name,
                     const std::string& div_name, double xi,
                     bool no_cross_check) {
  TabularModel model = model_from_json(read_text_file(model_file));
  Policy policy = policy_from_json(read_text_file(policy_file));
  RewardSpec reward = reward_from_json(read_text_file(reward_file));
  UncertaintySpec spec = spec_from_flags(spec_file, set_name, div_name, xi);

  try {
    RobustValueOptions options;
    options.cross_check = !no_cross_check;
    RobustValueReport report =
        robust_value(model, policy, reward, spec, options);
    json out;
    out["value"] = report.value;
    out["method"] = report.method;
    if (!report.inner_multiplier.empty()) {
      double min_multiplier = std::numeric_limits<double>::infinity();
      bool any_degenerate = false;
      for (const auto& level : report.inner_multiplier)
        for (double m : level) min_multiplier = std::min(min_multiplier, m);
      for (const auto& level : report.inner_degenerate)
        for (char d : level) any_degenerate = any_degenerate || d != 0;
      out["min_inner_multiplier"] = finite_or_null(min_multiplier);
      out["any_inner_degenerate"] = any_degenerate;
    }
    if (report.method == "p-dual") {
      out["dual_iterations"] = report.dual.iterations;
      out["dual_residual"] = report.dual.residual;
      if (spec.div == Divergence::kTV && options.cross_check)
        out["cross_check_gap"] = report.cross_check_gap;
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRow;
  }
}

json coverage_to_json(const CoverageReport& report) {
  json out;
  out["type1"] = finite_or_null(report.type1);
  out["type2"] = finite_or_null(report.type2);
  out["pointwise"] = finite_or_null(report.pointwise);
  json per_level = json::array();
  for (double v : report.type1_per_level) per_level.push_back(finite_or_null(v));
  out["type1_per_level"] = per_level;
  json per_step = json::array();
  for (double v : report.type2_per_step) per_step.push_back(finite_or_null(v));
  out["type2_per_step"] = per_step;
  return out;
}

int run_fit(const std::string& config_file, long n_override, long seed_index,
            int algorithm_override) {
  ExperimentConfig config = config_from_json(read_text_file(config_file));
  ExperimentInstance instance = load_instance(config);
  long n = n_override > 0 ? n_override : config.schedule.front();
  int algorithm =
      algorithm_override > 0 ? algorithm_override : config.algorithm;
  if (algorithm != 1 && algorithm != 2) fail("shape", "algorithm must be 1 or 2");
  if (seed_index < 1) fail("shape", "--seed must be >= 1");

  try {
    const TabularModel& truth =
        instance.cls.models[instance.cls.nominal_index];
    std::vector<double> referee;
    for (const Policy& policy : instance.policies)
      referee.push_back(robust_value(truth, policy, instance.reward,
                                     instance.spec, planning_options())
                            .value);
    double best = *std::max_element(referee.begin(), referee.end());

    std::uint64_t cell = static_cast<std::uint64_t>(seed_index - 1);
    std::uint64_t data_seed = derive_seed(config.master_seed, cell, 0);
    std::uint64_t split_seed = derive_seed(config.master_seed, cell, 1);
    OfflineDataset data = sample_dataset(truth, instance.behavior, n, data_seed);

    json out;
    out["n"] = n;
    out["seed"] = seed_index;
    out["algorithm"] = algorithm;
    out["referee"] = referee;

    long chosen = 0;
    if (algorithm == 1) {
      LearnerParams params;
      params.delta = config.overrides.delta;
      if (config.overrides.p_min >= 0.0) params.p_min = config.overrides.p_min;
      if (config.overrides.alpha >= 0.0) params.alpha = config.overrides.alpha;
      if (config.overrides.lambda >= 0.0)
        params.lambda = config.overrides.lambda;
      params.split_seed = split_seed;
      Alg1Result result = algorithm1(data, instance.cls, instance.policies,
                                     instance.reward, instance.spec, params);
      chosen = result.policy_index;
      out["theta_hat"] = result.mle.index;
      out["dg_size"] = result.distilled.retained.size();
      out["p_min"] = result.p_min;
      out["alpha"] = result.alpha;
      out["lambda"] = result.lambda;
      out["scale"] = finite_or_null(result.scale);
      out["robust_values"] = result.robust_values;
      out["bonus_values"] = result.bonus_values;
      out["objectives"] = result.objectives;
    } else {
      Alg2Result result =
          algorithm2(data, instance.cls, instance.policies, instance.reward,
                     instance.spec, config.overrides.beta,
                     config.overrides.delta);
      chosen = result.policy_index;
      out["confidence"] = result.confidence;
      out["objectives"] = result.objectives;
    }
    out["chosen"] = chosen;
    out["gap"] = std::max(0.0, best - referee[chosen]);

    json diagnostics;
    json per_policy = json::array();
    for (const Policy& policy : instance.policies)
      per_policy.push_back(coverage_to_json(coverage_report(
          policy, instance.behavior, truth, instance.cls.tests)));
    diagnostics["coverage"] = per_policy;
    if (instance.spec.set == SetKind::kT)
      diagnostics["wellness_cb"] =
          finite_or_null(wellness_cb_exact_t(truth, instance.spec));
    out["diagnostics"] = diagnostics;

    std::cout << out.dump(2) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRow;
  }
}

int run_sweep_cmd(const std::string& config_file, const std::string& output,
                  bool timing) {
  ExperimentConfig config = config_from_json(read_text_file(config_file));
  if (!output.empty()) config.output_path = output;
  if (config.output_path.empty())
    fail("shape", "no output path (config \"output\" or --output)");

  try {
    SweepResult result = run_sweep(config);
    emit_csv(result.rows, config.output_path, timing);

    json out;
    out["rows"] = result.rows.size();
    long errors = 0;
    for (const SweepRow& row : result.rows)
      if (!row.error.empty()) ++errors;
    out["errors"] = errors;
    out["output"] = config.output_path;
    out["referee"] = result.referee;
    std::map<long, std::vector<double>> by_n;
    for (const SweepRow& row : result.rows)
      if (row.error.empty() && std::isfinite(row.gap))
        by_n[row.n].push_back(row.gap);
    json medians;
    for (auto& [n, gaps] : by_n) {
      std::sort(gaps.begin(), gaps.end());
      std::size_t m = gaps.size();
      double median = (m % 2 == 1) ? gaps[m / 2]
                                   : 0.5 * (gaps[m / 2 - 1] + gaps[m / 2]);
      medians[std::to_string(n)] = median;
    }
    out["median_gap"] = medians;
    try {
      SlopeFit fit = fit_slope(result.rows);
      out["slope"] = {{"slope", fit.slope},
                      {"intercept", fit.intercept},
                      {"r2", fit.r2}};
    } catch (const Error& e) {
      out["slope"] = e.code();
    }
    std::cout << out.dump(2) << "\n";
    return result.any_error ? kExitRow : kExitOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRow;
  }
}

int run_validate_duals(long count, int grid_resolution, int max_dim,
                       std::uint64_t seed) {
  if (count < 1 || grid_resolution < 2 || max_dim < 2)
    fail("shape", "--count >= 1, --grid >= 2, --dim >= 2 required");
  try {
    Rng rng(seed);
    double max_tv_gap = 0.0;
    double max_kl_gap = 0.0;
    double tol = 2.0 / grid_resolution;
    for (long i = 0; i < count; ++i) {
      int dim = 2 + static_cast<int>(rng.next_u64() %
                                     static_cast<std::uint64_t>(max_dim - 1));
      std::vector<double> center(dim), loss(dim);
      double total = 0.0;
      for (int k = 0; k < dim; ++k) {
        center[k] = 0.05 + rng.uniform();
        total += center[k];
        loss[k] = rng.uniform();
      }
      for (int k = 0; k < dim; ++k) center[k] /= total;
      double xi = 0.01 + 0.49 * rng.uniform();

      SimplexGrid grid(grid_resolution, dim);
      for (Divergence div : {Divergence::kTV, Divergence::kKL}) {
        double oracle = std::numeric_limits<double>::infinity();
        for (const auto& row : row_ball(center, div, xi, grid)) {
          double v = 0.0;
          for (int k = 0; k < dim; ++k) v += row[k] * loss[k];
          oracle = std::min(oracle, v);
        }
        if (!std::isfinite(oracle)) continue;  // empty ball on this grid
        double dual = div == Divergence::kTV
                          ? tv_dual_expectation(center, loss, xi).value
                          : kl_dual_expectation(center, loss, xi).value;
        // The grid oracle restricts the adversary, so it can only overshoot;
        // a deviation in either direction beyond grid resolution is a bug.
        double gap = std::abs(dual - oracle);
        if (div == Divergence::kTV)
          max_tv_gap = std::max(max_tv_gap, gap);
        else
          max_kl_gap = std::max(max_kl_gap, gap);
      }
    }
    bool ok = max_tv_gap <= tol && max_kl_gap <= tol;
    json out;
    out["count"] = count;
    out["grid"] = grid_resolution;
    out["tolerance"] = tol;
    out["max_tv_gap"] = max_tv_gap;
    out["max_kl_gap"] = max_kl_gap;
    out["ok"] = ok;
    std::cout << out.dump(2) << "\n";
    return ok ? kExitOk : kExitRow;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRow;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust offline planning and learning for tabular "
               "non-Markovian decision processes"};
  app.require_subcommand(1);

  // robust-value
  auto* rv = app.add_subcommand(
      "robust-value", "Exact worst-case value of a policy over an uncertainty set");
  std::string rv_model, rv_policy, rv_reward, rv_spec;
  std::string rv_set = "T", rv_div = "tv";
  double rv_xi = 0.0;
  bool rv_no_cross = false;
  rv->add_option("--model", rv_model, "Model JSON file")->required();
  rv->add_option("--policy", rv_policy, "Policy JSON file")->required();
  rv->add_option("--reward", rv_reward, "Reward JSON file")->required();
  rv->add_option("--spec", rv_spec, "Uncertainty spec JSON file");
  rv->add_option("--set", rv_set, "Uncertainty set kind: T or P");
  rv->add_option("--div", rv_div, "Divergence: tv or kl");
  rv->add_option("--xi", rv_xi, "Radius");
  rv->add_flag("--no-cross-check", rv_no_cross,
               "Skip the primal/dual cross check for joint-law TV");

  // fit
  auto* fit = app.add_subcommand(
      "fit", "Run one algorithm fit and print a JSON diagnostics block");
  std::string fit_config;
  long fit_n = 0, fit_seed = 1;
  int fit_algorithm = 0;
  fit->add_option("--config", fit_config, "Experiment config JSON file")
      ->required();
  fit->add_option("--n", fit_n, "Dataset size (default: first schedule entry)");
  fit->add_option("--seed", fit_seed, "Seed index >= 1");
  fit->add_option("--algorithm", fit_algorithm,
                  "Override the config's algorithm (1 or 2)");

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "Run the configured dataset sweep and write the CSV");
  std::string sweep_config, sweep_output;
  bool sweep_timing = false;
  sweep->add_option("--config", sweep_config, "Experiment config JSON file")
      ->required();
  sweep->add_option("--output", sweep_output, "CSV path (overrides config)");
  sweep->add_flag("--timing", sweep_timing,
                  "Record wall time per row (breaks byte-identical reruns)");

  // validate-duals
  auto* vd = app.add_subcommand(
      "validate-duals",
      "Self-check scalar duals against simplex-grid oracles");
  long vd_count = 200;
  int vd_grid = 400, vd_dim = 3;
  std::uint64_t vd_seed = 1;
  vd->add_option("--count", vd_count, "Number of random instances");
  vd->add_option("--grid", vd_grid, "Simplex grid resolution");
  vd->add_option("--dim", vd_dim, "Maximum support size");
  vd->add_option("--seed", vd_seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (rv->parsed())
      return run_robust_value(rv_model, rv_policy, rv_reward, rv_spec, rv_set,
                              rv_div, rv_xi, rv_no_cross);
    if (fit->parsed()) return run_fit(fit_config, fit_n, fit_seed, fit_algorithm);
    if (sweep->parsed())
      return run_sweep_cmd(sweep_config, sweep_output, sweep_timing);
    if (vd->parsed())
      return run_validate_duals(vd_count, vd_grid, vd_dim, vd_seed);
  } catch (const Error& e) {
    // Errors escaping to here happened while loading/validating inputs.
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
