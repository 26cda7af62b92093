// Copyright 2026 The slimattn Authors
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
#include <string>
#include <vector>

#include "slim/mask.hpp"
#include "slim/scene.hpp"

namespace slim {

struct SuiteResult {
    std::string name;
    bool pass = false;
    int cases = 0;
    double seconds = 0.0;
    std::string detail; // failure description, empty on pass
};

/// Random scenes a verification pass iterates over: N in [1, 64], random
/// segment widths, tokens_per_object in [1, 3].
struct VerifyConfig {
    std::uint64_t seed = 20260811;
    int cases = 1000;
    bool inject_gradient_fault = false;
    // On failure the offending scene/layout/strategy are serialized here for
    // replay; empty disables.
    std::string replay_dir;
};

/// The strategy set every suite sweeps: all six kinds, with and without the
/// instruction override.
std::vector<MaskStrategy> all_strategies();

/// Table row order of the masking-strategy ablation.
std::vector<MaskStrategy> ablation_strategies();

SuiteResult run_oracle_equivalence(const VerifyConfig& config);
SuiteResult run_normalization_suite(const VerifyConfig& config);
SuiteResult run_invariance_suite(const VerifyConfig& config);
SuiteResult run_hyperparam_suite(const VerifyConfig& config);
SuiteResult run_attention_suite(const VerifyConfig& config);
SuiteResult run_gradient_suite(const VerifyConfig& config);

/// Every suite above, in order.
std::vector<SuiteResult> run_all_suites(const VerifyConfig& config);

} // namespace slim
