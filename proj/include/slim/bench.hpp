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
#include <filesystem>
#include <string>
#include <vector>

#include "slim/mask.hpp"

namespace slim {

struct BenchConfig {
    std::vector<int> sizes{64, 128, 256, 512}; // object counts
    std::vector<MaskStrategy> strategies;      // defaults to geo, full, causal
    int trials = 20;
    int warmup = 3;
    int d_head = 64;
    std::uint64_t seed = 20260811;
};

struct BenchRow {
    int n_objects = 0;
    int n_tokens = 0;
    std::string strategy;
    double object_block_density = 0.0;
    double dense_ms = 0.0;  // median over trials
    double sparse_ms = 0.0; // median over trials
    double max_abs_diff = 0.0; // dense vs sparse output, sanity
};

/// Times the dense and sparse-gather attention paths on masks built from
/// synthetic scenes (tokens_per_object = 1). Medians over `trials` runs after
/// `warmup` discarded runs.
std::vector<BenchRow> run_bench(const BenchConfig& config);

/// CSV: n_objects,strategy,object_block_density,dense_ms,sparse_ms
std::string bench_csv(const std::vector<BenchRow>& rows);

std::string bench_table(const std::vector<BenchRow>& rows);

} // namespace slim
