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

#include <string>

#include "robustpsr/learner.hpp"

namespace robustpsr {

// JSON serialization of the core domain types.  Numbers round-trip
// bit-exactly (shortest-exact double formatting on write).  Readers raise
// "shape" on malformed or dimensionally inconsistent documents.

std::string model_to_json(const TabularModel& model);
TabularModel model_from_json(const std::string& text);

std::string policy_to_json(const Policy& policy);
Policy policy_from_json(const std::string& text);

std::string reward_to_json(const RewardSpec& reward);
RewardSpec reward_from_json(const std::string& text);

std::string spec_to_json(const UncertaintySpec& spec);
UncertaintySpec spec_from_json(const std::string& text);

std::string tests_to_json(const CoreTests& tests);
CoreTests tests_from_json(const std::string& text);

std::string dataset_to_json(const OfflineDataset& data);
OfflineDataset dataset_from_json(const std::string& text);

/// Model class bundles: members, shared core tests, nominal index.
std::string model_class_to_json(const ModelClass& cls);
ModelClass model_class_from_json(const std::string& text);

/// Whole-file helpers.  Writing goes through a temporary in the same
/// directory plus an atomic rename, so readers never observe partial files.
std::string read_text_file(const std::string& path);
void write_text_file_atomic(const std::string& path,
                            const std::string& content);

}  // namespace robustpsr
