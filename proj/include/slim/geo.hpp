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

#include <vector>

#include "slim/boolmat.hpp"
#include "slim/mat.hpp"
#include "slim/scene.hpp"

namespace slim {

/// Bounds of the adaptive attentive neighborhood.
struct GeoParams {
    int k_min = 2;
    int k_max = 10;

    friend bool operator==(const GeoParams&, const GeoParams&) = default;
};

/// Throws ConfigError unless 0 <= k_min <= k_max.
void validate(const GeoParams& params);

struct Density {
    std::vector<double> rho;      // raw local density, may be negative
    std::vector<double> rho_norm; // min-max normalized to [0, 1]
};

/// Per-object neighbor index sets, each sorted ascending; i never appears in
/// its own set.
struct NeighborSets {
    std::vector<std::vector<int>> omega;
};

/// Everything the geometry-adaptive mask derives from a scene.
struct DensityProfile {
    Mat pairwise_d;
    std::vector<double> rho;
    std::vector<double> rho_norm;
    std::vector<int> k;
    NeighborSets neighbors;
};

/// Symmetric matrix of L2 distances between object centers; zero diagonal.
Mat pairwise_distances(const SceneObjects& scene);

/// Local density: rho_i = 1 - mean_{j != i} d_ij, then min-max normalized.
/// Degenerate cases: N == 1 or all rho equal give rho_norm = 1 everywhere,
/// so a uniform scene keeps the widest neighborhood the clamp allows.
Density local_density(const Mat& d);

/// Adaptive neighbor counts:
///   k_i = clamp(round((k_max - k_min) * rho_norm_i + k_min), 0, N - 1)
/// with round = half away from zero.
std::vector<int> adaptive_k(const std::vector<double>& rho_norm, const GeoParams& params, int n_objects);

/// k_i nearest objects to i by distance, ties broken toward the lower object
/// index. Requires k_i <= N - 1.
NeighborSets topk_neighbors(const Mat& d, const std::vector<int>& k);

/// Object-object allow matrix: allow(i, j) iff j is a neighbor of i or j == i.
/// Not symmetric in general (kNN asymmetry).
BoolMat geo_object_mask(const NeighborSets& neighbors, int n_objects);

/// Full pipeline: distances -> density -> k -> neighbor sets.
DensityProfile density_profile(const SceneObjects& scene, const GeoParams& params);

} // namespace slim
