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
#include <vector>

#include "slim/layout.hpp"
#include "slim/scene.hpp"

namespace slim {

/// Recipe for synthetic scenes with non-uniform spatial density: tight
/// clusters at mutually spaced anchors plus far outliers.
struct SceneRecipe {
    int n_clusters = 3;
    int per_cluster_min = 2;
    int per_cluster_max = 6;
    double cluster_radius = 0.25; // meters
    double cluster_spacing = 5.0; // minimum anchor separation, meters
    int outlier_count = 0;
    std::uint64_t seed = 0;

    friend bool operator==(const SceneRecipe&, const SceneRecipe&) = default;
};

void validate(const SceneRecipe& recipe);

/// Key=value recipe file reader/writer (keys: n_clusters, per_cluster_min,
/// per_cluster_max, cluster_radius, cluster_spacing, outlier_count, seed).
SceneRecipe load_recipe(const std::filesystem::path& path);
void save_recipe(const SceneRecipe& recipe, const std::filesystem::path& path);

/// Deterministic given recipe.seed. Object order is shuffled so it carries no
/// geometric signal; coordinates receive tiny irrational-step jitter so exact
/// distance ties do not occur. Throws GenerationError on infeasible packing.
SceneObjects generate_scene(const SceneRecipe& recipe);

// Token vocabulary of the synthetic grounding task. The first id_pool entries
// are object identifier tokens; an episode assigns its N identifiers from
// that pool by random permutation, so identity is decoupled from both
// geometry and order. The default recipe fills the pool exactly (N = 10).
namespace vocab {
inline constexpr int id_pool = 12;
inline constexpr int sys = 12;
inline constexpr int ask = 13;
inline constexpr int answer_slot = 14;
inline constexpr int object_feature = 15; // second token of every object block
inline constexpr int rank_base = 16;      // rank_base + (r - 1) encodes rank r
inline constexpr int rank_limit = 4;
inline constexpr int size = 20;
} // namespace vocab

/// One grounding episode: the instruction names a reference object (the
/// cluster representative) and a within-cluster proximity rank; the response
/// target is the identifier token of the referred object. Every object
/// contributes an identifier token plus a shared feature token
/// (tokens_per_object = 2), mirroring object-centric prompt layouts.
struct GroundingTask {
    SceneObjects scene;
    TokenLayout layout;
    std::vector<int> tokens;  // layout.total() input token ids
    std::vector<int> targets; // -1 outside the response segment
    std::vector<int> id_tokens; // identifier token of each object, scene order
    int rep_index = -1;    // object named by the instruction
    int target_index = -1; // referred object
    int rank = 1;
};

/// Resolves a descriptor against the scene geometry alone: the rank-th
/// nearest object to the representative (rank 1 = nearest). Throws
/// GenerationError on an exact distance tie at the deciding boundary
/// (ambiguous descriptor).
int resolve_descriptor(const SceneObjects& scene, int rep_index, int rank);

/// Builds an episode from a scene. Requires N >= 2 and N <= vocab::id_pool.
/// Ambiguous descriptors are regenerated with the next derived seed.
GroundingTask generate_grounding_task(const SceneObjects& scene, std::uint64_t seed);

} // namespace slim
