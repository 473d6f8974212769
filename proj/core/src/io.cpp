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

#include "robustpsr/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace robustpsr {

namespace {

using nlohmann::json;

json parse(const std::string& text) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) fail("shape", "malformed JSON document");
  return j;
}

Dims dims_from(const json& j) {
  Dims d;
  try {
    d.horizon = j.at("H").get<int>();
    d.num_obs = j.at("num_obs").get<int>();
    d.num_actions = j.at("num_actions").get<int>();
  } catch (const json::exception& e) {
    fail("shape", e.what());
  }
  d.validate();
  return d;
}

void dims_to(json& j, const Dims& d) {
  j["H"] = d.horizon;
  j["num_obs"] = d.num_obs;
  j["num_actions"] = d.num_actions;
}

template <typename T>
T field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail("shape", e.what());
  }
}

json trajectory_to(const Trajectory& traj) {
  return json{{"obs", traj.obs}, {"acts", traj.acts}};
}

Trajectory trajectory_from(const json& j) {
  return Trajectory{field<std::vector<int>>(j, "obs"),
                    field<std::vector<int>>(j, "acts")};
}

json model_to(const TabularModel& model) {
  json j;
  dims_to(j, model.dims());
  j["o1"] = model.initial_obs();
  j["transitions"] = model.tables();
  return j;
}

TabularModel model_from(const json& j) {
  return TabularModel(dims_from(j), field<int>(j, "o1"),
                      field<std::vector<std::vector<double>>>(j, "transitions"));
}

json policy_to(const Policy& policy) {
  json j;
  dims_to(j, policy.dims());
  j["deterministic"] = policy.deterministic();
  std::vector<std::vector<double>> tables;
  const Dims& d = policy.dims();
  for (int h = 1; h <= d.horizon; ++h) {
    std::vector<double> table;
    long rows = d.infoset_count(h);
    table.reserve(rows * d.num_actions);
    for (long x = 0; x < rows; ++x) {
      auto row = policy.action_row(h, x);
      table.insert(table.end(), row.begin(), row.end());
    }
    tables.push_back(std::move(table));
  }
  j["probs"] = tables;
  return j;
}

Policy policy_from(const json& j) {
  return Policy(dims_from(j), field<std::vector<std::vector<double>>>(j, "probs"),
                j.value("deterministic", false));
}

json tests_to(const CoreTests& tests) {
  json j;
  dims_to(j, tests.dims());
  json levels = json::array();
  for (int h = 0; h < tests.dims().horizon; ++h) {
    json level = json::array();
    for (const CoreTest& test : tests.level(h))
      level.push_back(json{{"obs", test.obs}, {"acts", test.acts}});
    levels.push_back(std::move(level));
  }
  j["levels"] = levels;
  return j;
}

CoreTests tests_from(const json& j) {
  Dims d = dims_from(j);
  std::vector<std::vector<CoreTest>> levels;
  try {
    for (const json& level : j.at("levels")) {
      std::vector<CoreTest> tests;
      for (const json& test : level)
        tests.push_back(CoreTest{field<std::vector<int>>(test, "obs"),
                                 field<std::vector<int>>(test, "acts")});
      levels.push_back(std::move(tests));
    }
  } catch (const json::exception& e) {
    fail("shape", e.what());
  }
  return CoreTests(d, std::move(levels));
}

}  // namespace

std::string model_to_json(const TabularModel& model) {
  return model_to(model).dump(2);
}

TabularModel model_from_json(const std::string& text) {
  return model_from(parse(text));
}

std::string policy_to_json(const Policy& policy) {
  return policy_to(policy).dump(2);
}

Policy policy_from_json(const std::string& text) {
  return policy_from(parse(text));
}

std::string reward_to_json(const RewardSpec& reward) {
  json j;
  dims_to(j, reward.dims());
  j["values"] = reward.values();
  return j.dump(2);
}

RewardSpec reward_from_json(const std::string& text) {
  json j = parse(text);
  return RewardSpec(dims_from(j), field<std::vector<double>>(j, "values"));
}

std::string spec_to_json(const UncertaintySpec& spec) {
  json j;
  j["set"] = spec.set == SetKind::kT ? "T" : "P";
  j["div"] = spec.div == Divergence::kTV ? "tv" : "kl";
  j["xi"] = spec.radius;
  return j.dump(2);
}

UncertaintySpec spec_from_json(const std::string& text) {
  json j = parse(text);
  UncertaintySpec spec;
  std::string set = field<std::string>(j, "set");
  std::string div = field<std::string>(j, "div");
  if (set == "T" || set == "t")
    spec.set = SetKind::kT;
  else if (set == "P" || set == "p")
    spec.set = SetKind::kP;
  else
    fail("shape", "set must be T or P");
  if (div == "tv")
    spec.div = Divergence::kTV;
  else if (div == "kl")
    spec.div = Divergence::kKL;
  else
    fail("shape", "div must be tv or kl");
  spec.radius = field<double>(j, "xi");
  spec.validate();
  return spec;
}

std::string tests_to_json(const CoreTests& tests) {
  return tests_to(tests).dump(2);
}

CoreTests tests_from_json(const std::string& text) {
  return tests_from(parse(text));
}

std::string dataset_to_json(const OfflineDataset& data) {
  json j;
  j["behavior"] = policy_to(data.behavior);
  json trajectories = json::array();
  for (const Trajectory& traj : data.trajectories)
    trajectories.push_back(trajectory_to(traj));
  j["trajectories"] = trajectories;
  return j.dump(2);
}

OfflineDataset dataset_from_json(const std::string& text) {
  json j = parse(text);
  Policy behavior = [&] {
    try {
      return policy_from(j.at("behavior"));
    } catch (const json::exception& e) {
      fail("shape", e.what());
    }
  }();
  std::vector<Trajectory> trajectories;
  try {
    for (const json& traj : j.at("trajectories"))
      trajectories.push_back(trajectory_from(traj));
  } catch (const json::exception& e) {
    fail("shape", e.what());
  }
  return OfflineDataset(std::move(trajectories), std::move(behavior));
}

std::string model_class_to_json(const ModelClass& cls) {
  json j;
  json models = json::array();
  for (const TabularModel& m : cls.models) models.push_back(model_to(m));
  j["models"] = models;
  j["tests"] = tests_to(cls.tests);
  j["nominal"] = cls.nominal_index;
  return j.dump(2);
}

ModelClass model_class_from_json(const std::string& text) {
  json j = parse(text);
  std::vector<TabularModel> models;
  try {
    for (const json& m : j.at("models")) models.push_back(model_from(m));
  } catch (const json::exception& e) {
    fail("shape", e.what());
  }
  CoreTests tests = [&] {
    try {
      return tests_from(j.at("tests"));
    } catch (const json::exception& e) {
      fail("shape", e.what());
    }
  }();
  return ModelClass(std::move(models), std::move(tests),
                    j.value("nominal", 0L));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("shape", "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file_atomic(const std::string& path,
                            const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail("shape", "cannot open " + tmp);
    out << content;
    if (!out) fail("shape", "write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail("shape", "rename failed for " + path);
}

}  // namespace robustpsr
