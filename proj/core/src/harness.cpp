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

#include "robustpsr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <thread>

#include <nlohmann/json.hpp>

#include "robustpsr/io.hpp"
#include "robustpsr/robust_values.hpp"

namespace robustpsr {

namespace {

using nlohmann::json;

// Numerical slack when checking that a pessimistic objective lower-bounds the
// exact robust value; both sides are deterministic floating-point quantities.
constexpr double kLcbSlack = 1e-9;

constexpr const char* kCsvHeader =
    "N,seed,gap,dg_size,theta_hat,conf_size,lcb_valid,ms";

[[noreturn]] void bad_config(const std::string& what) { fail("shape", what); }

double get_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) bad_config(std::string(key) + " must be a number");
  return j[key].get<double>();
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

SweepRow compute_row(const ExperimentInstance& instance,
                     std::span<const double> referee, double best_value,
                     const ExperimentConfig& config, long n_index,
                     long seed_index) {
  SweepRow row;
  row.n = config.schedule[n_index];
  row.seed = seed_index + 1;
  auto start = std::chrono::steady_clock::now();
  try {
    std::uint64_t cell =
        static_cast<std::uint64_t>(n_index) *
            static_cast<std::uint64_t>(config.seeds) +
        static_cast<std::uint64_t>(seed_index);
    std::uint64_t data_seed = derive_seed(config.master_seed, cell, 0);
    std::uint64_t split_seed = derive_seed(config.master_seed, cell, 1);
    const TabularModel& truth =
        instance.cls.models[instance.cls.nominal_index];
    OfflineDataset data =
        sample_dataset(truth, instance.behavior, row.n, data_seed);

    long chosen = 0;
    if (config.algorithm == 1) {
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
      row.dg_size = static_cast<long>(result.distilled.retained.size());
      row.theta_hat = result.mle.index;
      row.conf_size = 0;
      row.lcb_valid = true;
      for (std::size_t i = 0; i < referee.size(); ++i)
        if (result.objectives[i] > referee[i] + kLcbSlack)
          row.lcb_valid = false;
    } else {
      Alg2Result result =
          algorithm2(data, instance.cls, instance.policies, instance.reward,
                     instance.spec, config.overrides.beta,
                     config.overrides.delta);
      chosen = result.policy_index;
      row.dg_size = 0;
      row.theta_hat = -1;
      row.conf_size = static_cast<long>(result.confidence.size());
      row.lcb_valid =
          std::find(result.confidence.begin(), result.confidence.end(),
                    instance.cls.nominal_index) != result.confidence.end();
    }
    row.gap = std::max(0.0, best_value - referee[chosen]);
  } catch (const Error& e) {
    row.error = e.code();
    row.gap = std::numeric_limits<double>::quiet_NaN();
    row.dg_size = -1;
    row.theta_hat = -1;
    row.conf_size = -1;
    row.lcb_valid = false;
  }
  row.ms = std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
               .count();
  return row;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (generator != "" && generator != "ring2" && generator != "ring2-family")
    bad_config("unknown generator '" + generator + "'");
  if (schedule.empty()) bad_config("schedule must be nonempty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 1) bad_config("schedule entries must be >= 1");
    if (i > 0 && schedule[i] <= schedule[i - 1])
      bad_config("schedule must be strictly increasing");
  }
  if (seeds < 1) bad_config("seeds must be >= 1");
  if (algorithm != 1 && algorithm != 2) bad_config("algorithm must be 1 or 2");
  if (!(overrides.delta > 0.0 && overrides.delta < 1.0))
    bad_config("delta must lie in (0, 1)");
  if (generator.empty()) {
    if (model_class_file.empty() || behavior_file.empty() ||
        reward_file.empty() || policy_files.empty())
      bad_config(
          "file-based configs need model_class, behavior, reward, and at "
          "least one policy");
    if (!spec.has_value()) bad_config("file-based configs need a spec");
  }
  if (generator == "ring2" && !spec.has_value())
    bad_config("the ring2 generator needs an explicit spec");
  if (spec.has_value()) spec->validate();
}

ExperimentConfig config_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    bad_config("config is not a JSON object");
  ExperimentConfig config;
  if (j.contains("generator")) config.generator = j["generator"].get<std::string>();
  if (j.contains("model_class"))
    config.model_class_file = j["model_class"].get<std::string>();
  if (j.contains("behavior"))
    config.behavior_file = j["behavior"].get<std::string>();
  if (j.contains("policies")) {
    if (!j["policies"].is_array()) bad_config("policies must be an array");
    for (const auto& p : j["policies"])
      config.policy_files.push_back(p.get<std::string>());
  }
  if (j.contains("reward")) config.reward_file = j["reward"].get<std::string>();
  if (j.contains("spec")) config.spec = spec_from_json(j["spec"].dump());
  if (!j.contains("schedule") || !j["schedule"].is_array())
    bad_config("schedule must be an array");
  for (const auto& n : j["schedule"]) {
    if (!n.is_number_integer()) bad_config("schedule entries must be integers");
    config.schedule.push_back(n.get<long>());
  }
  config.seeds = static_cast<long>(get_number(j, "seeds", 1));
  config.master_seed =
      static_cast<std::uint64_t>(get_number(j, "master_seed", 1));
  config.algorithm = static_cast<int>(get_number(j, "algorithm", 1));
  if (j.contains("overrides")) {
    const json& o = j["overrides"];
    if (!o.is_object()) bad_config("overrides must be an object");
    config.overrides.p_min = get_number(o, "p_min", -1.0);
    config.overrides.alpha = get_number(o, "alpha", -1.0);
    config.overrides.lambda = get_number(o, "lambda", -1.0);
    config.overrides.beta = get_number(o, "beta", -1.0);
    config.overrides.delta = get_number(o, "delta", 0.1);
  }
  if (j.contains("output")) config.output_path = j["output"].get<std::string>();
  config.validate();
  return config;
}

std::string config_to_json(const ExperimentConfig& config) {
  json j;
  if (!config.generator.empty()) j["generator"] = config.generator;
  if (!config.model_class_file.empty())
    j["model_class"] = config.model_class_file;
  if (!config.behavior_file.empty()) j["behavior"] = config.behavior_file;
  if (!config.policy_files.empty()) j["policies"] = config.policy_files;
  if (!config.reward_file.empty()) j["reward"] = config.reward_file;
  if (config.spec.has_value())
    j["spec"] = json::parse(spec_to_json(*config.spec));
  j["schedule"] = config.schedule;
  j["seeds"] = config.seeds;
  j["master_seed"] = config.master_seed;
  j["algorithm"] = config.algorithm;
  j["overrides"] = {{"p_min", config.overrides.p_min},
                    {"alpha", config.overrides.alpha},
                    {"lambda", config.overrides.lambda},
                    {"beta", config.overrides.beta},
                    {"delta", config.overrides.delta}};
  if (!config.output_path.empty()) j["output"] = config.output_path;
  return j.dump(2);
}

ExperimentInstance load_instance(const ExperimentConfig& config) {
  config.validate();
  if (config.generator == "ring2-family") {
    ExperimentInstance instance = ring2_family();
    if (config.spec.has_value()) instance.spec = *config.spec;
    return instance;
  }
  if (config.generator == "ring2") {
    return ExperimentInstance{ring2_class(),
                              ring2_uniform(),
                              {ring2_constant(0), ring2_constant(1)},
                              ring2_reward(),
                              *config.spec};
  }
  ModelClass cls =
      model_class_from_json(read_text_file(config.model_class_file));
  Policy behavior = policy_from_json(read_text_file(config.behavior_file));
  std::vector<Policy> policies;
  for (const std::string& path : config.policy_files)
    policies.push_back(policy_from_json(read_text_file(path)));
  RewardSpec reward = reward_from_json(read_text_file(config.reward_file));
  return ExperimentInstance{std::move(cls), std::move(behavior),
                            std::move(policies), std::move(reward),
                            *config.spec};
}

int sweep_thread_count(long rows) {
  long count = static_cast<long>(std::thread::hardware_concurrency());
  if (count < 1) count = 1;
  if (const char* env = std::getenv("ROBUSTPSR_THREADS")) {
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) count = std::min(count, cap);
  }
  return static_cast<int>(std::max(1L, std::min(count, rows)));
}

SweepResult run_sweep(const ExperimentConfig& config) {
  config.validate();
  ExperimentInstance instance = load_instance(config);
  if (instance.policies.empty()) bad_config("no candidate policies");

  SweepResult result;
  const TabularModel& truth = instance.cls.models[instance.cls.nominal_index];
  for (const Policy& policy : instance.policies)
    result.referee.push_back(
        robust_value(truth, policy, instance.reward, instance.spec,
                     planning_options())
            .value);
  double best_value =
      *std::max_element(result.referee.begin(), result.referee.end());

  long total = static_cast<long>(config.schedule.size()) * config.seeds;
  result.rows.resize(total);
  std::atomic<long> next{0};
  auto work = [&]() {
    for (long i = next.fetch_add(1); i < total; i = next.fetch_add(1))
      result.rows[i] =
          compute_row(instance, result.referee, best_value, config,
                      i / config.seeds, i % config.seeds);
  };
  int workers = sweep_thread_count(total);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  std::sort(result.rows.begin(), result.rows.end(),
            [](const SweepRow& a, const SweepRow& b) {
              return a.n != b.n ? a.n < b.n : a.seed < b.seed;
            });
  for (const SweepRow& row : result.rows)
    if (!row.error.empty()) result.any_error = true;
  return result;
}

SlopeFit fit_slope(std::span<const SweepRow> rows) {
  std::map<long, std::vector<double>> gaps_by_n;
  for (const SweepRow& row : rows)
    if (row.error.empty() && std::isfinite(row.gap))
      gaps_by_n[row.n].push_back(row.gap);

  std::vector<double> xs, ys;
  for (auto& [n, gaps] : gaps_by_n) {
    std::sort(gaps.begin(), gaps.end());
    std::size_t m = gaps.size();
    double median = (m % 2 == 1) ? gaps[m / 2]
                                 : 0.5 * (gaps[m / 2 - 1] + gaps[m / 2]);
    if (median > 0.0) {
      xs.push_back(std::log(static_cast<double>(n)));
      ys.push_back(std::log(median));
    }
  }
  if (xs.size() < 3)
    fail("insufficient-points",
         "need at least 3 sample sizes with positive median gaps, have " +
             std::to_string(xs.size()));

  double n = static_cast<double>(xs.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mean_x;
    double dy = ys[i] - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) fail("insufficient-points", "all sample sizes coincide");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  double ss_res = syy - sxy * sxy / sxx;
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

std::string csv_text(std::span<const SweepRow> rows, bool include_timing) {
  std::vector<SweepRow> sorted(rows.begin(), rows.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const SweepRow& a, const SweepRow& b) {
              return a.n != b.n ? a.n < b.n : a.seed < b.seed;
            });
  std::string out = kCsvHeader;
  out += '\n';
  for (const SweepRow& row : sorted) {
    out += std::to_string(row.n);
    out += ',';
    out += std::to_string(row.seed);
    out += ',';
    out += format_double(row.gap);
    out += ',';
    out += std::to_string(row.dg_size);
    out += ',';
    out += std::to_string(row.theta_hat);
    out += ',';
    out += std::to_string(row.conf_size);
    out += ',';
    out += row.lcb_valid ? '1' : '0';
    out += ',';
    out += format_double(include_timing ? row.ms : 0.0);
    out += '\n';
  }
  return out;
}

void emit_csv(std::span<const SweepRow> rows, const std::string& path,
              bool include_timing) {
  write_text_file_atomic(path, csv_text(rows, include_timing));
}

std::vector<SweepRow> parse_csv(const std::string& text) {
  std::vector<SweepRow> rows;
  std::size_t pos = 0;
  bool saw_header = false;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != kCsvHeader) fail("shape", "unexpected CSV header");
      saw_header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (fields.size() != 8) fail("shape", "CSV row does not have 8 columns");
    SweepRow row;
    row.n = std::strtol(fields[0].c_str(), nullptr, 10);
    row.seed = std::strtol(fields[1].c_str(), nullptr, 10);
    row.gap = std::strtod(fields[2].c_str(), nullptr);
    row.dg_size = std::strtol(fields[3].c_str(), nullptr, 10);
    row.theta_hat = std::strtol(fields[4].c_str(), nullptr, 10);
    row.conf_size = std::strtol(fields[5].c_str(), nullptr, 10);
    row.lcb_valid = fields[6] != "0";
    row.ms = std::strtod(fields[7].c_str(), nullptr);
    rows.push_back(std::move(row));
  }
  if (!saw_header) fail("shape", "CSV is empty");
  return rows;
}

}  // namespace robustpsr
