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

// Reference mask builder. Everything here is written the slow, obvious way on
// purpose: per-entry rule evaluation, full stable sorts, no reuse of the geo /
// mask_builder code paths. Do not "optimize" this file or fold it into the
// main implementation; the verification suites depend on it staying
// independent.

#include "slim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "slim/error.hpp"

namespace slim::oracle {

namespace {

double dist(const SceneObjects& scene, int i, int j) {
    const Point3& a = scene.center(i);
    const Point3& b = scene.center(j);
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Adaptive neighbor count of object i, straight from the definitions.
int neighbor_count(const SceneObjects& scene, int i, int k_min, int k_max) {
    const int n = scene.size();
    if (n == 1) return 0;

    std::vector<double> rho(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        double sum = 0.0;
        for (int b = 0; b < n; ++b) {
            if (b != a) sum += dist(scene, a, b);
        }
        rho[static_cast<std::size_t>(a)] = 1.0 - sum / static_cast<double>(n - 1);
    }
    double rho_min = rho[0], rho_max = rho[0];
    for (double r : rho) {
        rho_min = std::min(rho_min, r);
        rho_max = std::max(rho_max, r);
    }
    double rho_norm = 1.0;
    if (rho_max != rho_min) {
        rho_norm = (rho[static_cast<std::size_t>(i)] - rho_min) / (rho_max - rho_min);
    }
    const double value = (k_max - k_min) * rho_norm + k_min;
    long long k = std::llround(value);
    if (k < 0) k = 0;
    if (k > n - 1) k = n - 1;
    return static_cast<int>(k);
}

// The k nearest objects to i; stable sort keeps ties in ascending index order.
std::vector<int> nearest(const SceneObjects& scene, int i, int k) {
    std::vector<int> order;
    for (int j = 0; j < scene.size(); ++j) {
        if (j != i) order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return dist(scene, i, a) < dist(scene, i, b); });
    order.resize(static_cast<std::size_t>(k));
    return order;
}

bool contains(const std::vector<int>& v, int x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

} // namespace

AttentionMask reference_mask(const SceneObjects& scene, const TokenLayout& layout, const MaskStrategy& strategy) {
    const int n_obj = layout.n_objects();
    if (n_obj > 0 && n_obj != scene.size()) {
        throw ConfigError("layout expects " + std::to_string(n_obj) + " objects but scene has " +
                          std::to_string(scene.size()));
    }
    const int n = layout.total();
    const SegmentSpans spans = segment_spans(layout);

    // Neighbor sets, when the strategy needs them.
    std::vector<std::vector<int>> omega(static_cast<std::size_t>(n_obj));
    if (n_obj > 0 && strategy.kind == MaskKind::Geo) {
        for (int i = 0; i < n_obj; ++i) {
            const int k = neighbor_count(scene, i, strategy.geo.k_min, strategy.geo.k_max);
            omega[static_cast<std::size_t>(i)] = nearest(scene, i, k);
        }
    }
    if (n_obj > 0 && strategy.kind == MaskKind::FixedN) {
        const int k = std::min(strategy.n_fixed, n_obj - 1);
        for (int i = 0; i < n_obj; ++i) {
            omega[static_cast<std::size_t>(i)] = nearest(scene, i, k);
        }
    }

    BoolMat allow(n, false);
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            bool v = q <= p; // causal base

            if (strategy.kind == MaskKind::FullAll) {
                v = true;
            } else {
                const int i = layout.object_of(p);
                const int j = layout.object_of(q);
                if (i >= 0 && j >= 0) {
                    switch (strategy.kind) {
                        case MaskKind::Causal: break;
                        case MaskKind::FullObjectBlock: v = true; break;
                        case MaskKind::DiagonalObjectBlock: v = (i == j); break;
                        case MaskKind::FixedN:
                        case MaskKind::Geo: v = (i == j) || contains(omega[static_cast<std::size_t>(i)], j); break;
                        case MaskKind::FullAll: break; // unreachable
                    }
                }
                if (strategy.inst && i >= 0 && spans.instruction.contains(q)) {
                    v = true;
                }
            }
            allow.set(p, q, v);
        }
    }
    return AttentionMask(layout, std::move(allow));
}

} // namespace slim::oracle
