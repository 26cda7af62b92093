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

#include "slim/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "slim/attention.hpp"
#include "slim/error.hpp"
#include "slim/rng.hpp"
#include "slim/scene_gen.hpp"

namespace slim {

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

SceneObjects bench_scene(int n_objects, std::uint64_t seed) {
    // clusters of eight keep the density structure non-uniform at any size
    SceneRecipe recipe;
    const int per = std::min(8, n_objects);
    recipe.n_clusters = std::max(1, n_objects / per);
    recipe.per_cluster_min = per;
    recipe.per_cluster_max = per;
    recipe.outlier_count = n_objects - recipe.n_clusters * per;
    recipe.cluster_radius = 0.3;
    recipe.cluster_spacing = 4.0;
    recipe.seed = seed;
    return generate_scene(recipe);
}

} // namespace

std::vector<BenchRow> run_bench(const BenchConfig& config) {
    if (config.trials < 1 || config.warmup < 0 || config.d_head < 1) {
        throw ConfigError("bench needs positive trials and head width");
    }
    std::vector<MaskStrategy> strategies = config.strategies;
    if (strategies.empty()) {
        strategies = {MaskStrategy::parse("geo"), MaskStrategy::parse("full"), MaskStrategy::parse("causal")};
    }

    std::vector<BenchRow> rows;
    for (int n_objects : config.sizes) {
        if (n_objects < 1) throw ConfigError("bench sizes must be positive");
        const SceneObjects scene = bench_scene(n_objects, derive_seed(config.seed, 0xBE, n_objects));
        const TokenLayout layout(2, n_objects, 1, 4, 2);
        const int n = layout.total();

        Rng rng(derive_seed(config.seed, 0xDA7A, n_objects));
        Mat q(n, config.d_head), k(n, config.d_head), v(n, config.d_head);
        for (double& value : q.data) value = rng.normal();
        for (double& value : k.data) value = rng.normal();
        for (double& value : v.data) value = rng.normal();

        for (const MaskStrategy& strategy : strategies) {
            const AttentionMask mask = compose(scene, layout, strategy);
            const MaskCsr csr = MaskCsr::build(mask);

            BenchRow row;
            row.n_objects = n_objects;
            row.n_tokens = n;
            row.strategy = strategy.str();
            row.object_block_density = sparsity_stats(mask).object_block_density;

            // one-off sanity: the two paths must agree
            {
                const Mat dense = masked_attention(q, k, v, mask);
                const Mat sparse = masked_attention_sparse(q, k, v, csr);
                for (std::size_t i = 0; i < dense.data.size(); ++i) {
                    row.max_abs_diff = std::max(row.max_abs_diff, std::abs(dense.data[i] - sparse.data[i]));
                }
            }

            std::vector<double> dense_ms, sparse_ms;
            for (int t = 0; t < config.warmup + config.trials; ++t) {
                const auto t0 = Clock::now();
                const Mat dense = masked_attention(q, k, v, mask);
                const auto t1 = Clock::now();
                const Mat sparse = masked_attention_sparse(q, k, v, csr);
                const auto t2 = Clock::now();
                if (t >= config.warmup) {
                    dense_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
                    sparse_ms.push_back(std::chrono::duration<double, std::milli>(t2 - t1).count());
                }
                // keep the optimizer honest
                if (dense.data[0] == 0.12345 && sparse.data[0] == 0.54321) std::fputc(' ', stderr);
            }
            row.dense_ms = median(dense_ms);
            row.sparse_ms = median(sparse_ms);
            rows.push_back(row);
        }
    }
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream os;
    os << "n_objects,strategy,object_block_density,dense_ms,sparse_ms\n";
    char buf[160];
    for (const BenchRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%s,%.6f,%.4f,%.4f", r.n_objects, r.strategy.c_str(),
                      r.object_block_density, r.dense_ms, r.sparse_ms);
        os << buf << "\n";
    }
    return os.str();
}

std::string bench_table(const std::vector<BenchRow>& rows) {
    std::ostringstream os;
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%8s  %-10s  %8s  %10s  %10s  %8s\n", "N", "strategy", "density", "dense_ms",
                  "sparse_ms", "speedup");
    os << buf;
    for (const BenchRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%8d  %-10s  %8.4f  %10.4f  %10.4f  %7.2fx\n", r.n_objects,
                      r.strategy.c_str(), r.object_block_density, r.dense_ms, r.sparse_ms,
                      r.sparse_ms > 0 ? r.dense_ms / r.sparse_ms : 0.0);
        os << buf;
    }
    return os.str();
}

} // namespace slim
