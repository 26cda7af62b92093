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

#include "slim/geo.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "slim/error.hpp"

namespace slim {

void validate(const GeoParams& params) {
    if (params.k_min < 0 || params.k_max < 0) {
        throw ConfigError("neighborhood bounds must be non-negative");
    }
    if (params.k_min > params.k_max) {
        throw ConfigError("k_min must not exceed k_max");
    }
}

Mat pairwise_distances(const SceneObjects& scene) {
    const int n = scene.size();
    Mat d(n, n);
#pragma omp parallel for schedule(static) if (n >= 64)
    for (int i = 0; i < n; ++i) {
        const Point3& ci = scene.center(i);
        for (int j = 0; j < n; ++j) {
            d[i][j] = (i == j) ? 0.0 : distance(ci, scene.center(j));
        }
    }
    return d;
}

Density local_density(const Mat& d) {
    const int n = d.rows;
    Density out;
    out.rho.resize(static_cast<std::size_t>(n));
    out.rho_norm.assign(static_cast<std::size_t>(n), 1.0);
    if (n == 1) {
        // No neighbors exist; treat the lone object as maximally dense.
        out.rho[0] = 1.0;
        return out;
    }
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j != i) sum += d[i][j];
        }
        out.rho[static_cast<std::size_t>(i)] = 1.0 - sum / static_cast<double>(n - 1);
    }
    const auto [mn_it, mx_it] = std::minmax_element(out.rho.begin(), out.rho.end());
    const double mn = *mn_it;
    const double mx = *mx_it;
    if (mx == mn) {
        // Uniform scene: no sparse region to protect, keep rho_norm at 1.
        return out;
    }
    for (int i = 0; i < n; ++i) {
        out.rho_norm[static_cast<std::size_t>(i)] = (out.rho[static_cast<std::size_t>(i)] - mn) / (mx - mn);
    }
    return out;
}

std::vector<int> adaptive_k(const std::vector<double>& rho_norm, const GeoParams& params, int n_objects) {
    validate(params);
    std::vector<int> k(rho_norm.size());
    const int hi = n_objects - 1;
    for (std::size_t i = 0; i < rho_norm.size(); ++i) {
        const double v = (params.k_max - params.k_min) * rho_norm[i] + params.k_min;
        const long long rounded = std::llround(v); // half away from zero
        k[i] = static_cast<int>(std::clamp<long long>(rounded, 0, hi));
    }
    return k;
}

NeighborSets topk_neighbors(const Mat& d, const std::vector<int>& k) {
    const int n = d.rows;
    NeighborSets sets;
    sets.omega.resize(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static) if (n >= 64)
    for (int i = 0; i < n; ++i) {
        const int ki = k[static_cast<std::size_t>(i)];
        if (ki < 0 || ki > n - 1) {
            continue; // validated below, outside the parallel region
        }
        std::vector<std::pair<double, int>> cand;
        cand.reserve(static_cast<std::size_t>(n - 1));
        for (int j = 0; j < n; ++j) {
            if (j != i) cand.emplace_back(d[i][j], j);
        }
        // pair ordering = (distance, index): ties go to the lower object index
        std::partial_sort(cand.begin(), cand.begin() + ki, cand.end());
        std::vector<int>& omega = sets.omega[static_cast<std::size_t>(i)];
        omega.resize(static_cast<std::size_t>(ki));
        for (int t = 0; t < ki; ++t) omega[static_cast<std::size_t>(t)] = cand[static_cast<std::size_t>(t)].second;
        std::sort(omega.begin(), omega.end());
    }
    for (int i = 0; i < n; ++i) {
        const int ki = k[static_cast<std::size_t>(i)];
        if (ki < 0 || ki > n - 1) {
            throw ConfigError("neighbor count " + std::to_string(ki) + " out of range for " + std::to_string(n) +
                              " objects");
        }
    }
    return sets;
}

BoolMat geo_object_mask(const NeighborSets& neighbors, int n_objects) {
    BoolMat m(n_objects, false);
    for (int i = 0; i < n_objects; ++i) {
        m.set(i, i, true);
        for (int j : neighbors.omega[static_cast<std::size_t>(i)]) {
            m.set(i, j, true);
        }
    }
    return m;
}

DensityProfile density_profile(const SceneObjects& scene, const GeoParams& params) {
    DensityProfile profile;
    profile.pairwise_d = pairwise_distances(scene);
    Density density = local_density(profile.pairwise_d);
    profile.rho = std::move(density.rho);
    profile.rho_norm = std::move(density.rho_norm);
    profile.k = adaptive_k(profile.rho_norm, params, scene.size());
    profile.neighbors = topk_neighbors(profile.pairwise_d, profile.k);
    return profile;
}

} // namespace slim
