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

#include <doctest.h>

#include <algorithm>

#include "slim/error.hpp"
#include "slim/geo.hpp"
#include "slim/mask.hpp"
#include "slim/scene_gen.hpp"
#include "testing.hpp"

using namespace slim;

TEST_SUITE_BEGIN("scene_gen");

TEST_CASE("single tight cluster bounds every pairwise distance") {
    SceneRecipe recipe;
    recipe.n_clusters = 1;
    recipe.per_cluster_min = 5;
    recipe.per_cluster_max = 5;
    recipe.outlier_count = 0;
    recipe.cluster_radius = 0.4;
    recipe.seed = 9;
    const SceneObjects scene = generate_scene(recipe);
    CHECK(scene.size() == 5);
    const Mat d = pairwise_distances(scene);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            CHECK(d[i][j] <= 2.0 * recipe.cluster_radius + 1e-6);
        }
    }
}

TEST_CASE("two far clusters separate cleanly") {
    SceneRecipe recipe;
    recipe.n_clusters = 2;
    recipe.per_cluster_min = 4;
    recipe.per_cluster_max = 4;
    recipe.outlier_count = 0;
    recipe.cluster_radius = 0.2;
    recipe.cluster_spacing = 10.0;
    recipe.seed = 11;
    const SceneObjects scene = generate_scene(recipe);
    REQUIRE(scene.size() == 8);
    const Mat d = pairwise_distances(scene);

    // recover the two groups by thresholding: intra <= 2r, inter >= spacing - 2r
    double max_intra = 0.0, min_inter = 1e300;
    for (int i = 0; i < 8; ++i) {
        for (int j = i + 1; j < 8; ++j) {
            if (d[i][j] < 1.0) {
                max_intra = std::max(max_intra, d[i][j]);
            } else {
                min_inter = std::min(min_inter, d[i][j]);
            }
        }
    }
    CHECK(max_intra <= 2.0 * recipe.cluster_radius + 1e-6);
    CHECK(min_inter > max_intra);
    CHECK(min_inter >= recipe.cluster_spacing - 2.0 * recipe.cluster_radius - 1e-6);
}

TEST_CASE("same recipe and seed reproduce the scene exactly") {
    SceneRecipe recipe;
    recipe.seed = 77;
    const SceneObjects a = generate_scene(recipe);
    const SceneObjects b = generate_scene(recipe);
    CHECK(a == b);
    recipe.seed = 78;
    CHECK_FALSE(generate_scene(recipe) == a);
}

TEST_CASE("recipe validation") {
    SceneRecipe recipe;
    recipe.n_clusters = 0;
    CHECK_THROWS_AS(validate(recipe), ConfigError);
    recipe = SceneRecipe{};
    recipe.per_cluster_max = 1;
    recipe.per_cluster_min = 2;
    CHECK_THROWS_AS(validate(recipe), ConfigError);
    recipe = SceneRecipe{};
    recipe.cluster_spacing = 1e13;
    CHECK_THROWS_AS(validate(recipe), GenerationError);
}

TEST_CASE("recipe file round-trip") {
    SceneRecipe recipe;
    recipe.n_clusters = 4;
    recipe.per_cluster_min = 3;
    recipe.per_cluster_max = 6;
    recipe.cluster_radius = 0.5;
    recipe.cluster_spacing = 7.5;
    recipe.outlier_count = 1;
    recipe.seed = 123;
    testing::TempFile f("recipe");
    save_recipe(recipe, f.path());
    CHECK(load_recipe(f.path()) == recipe);
}

TEST_CASE("shuffled object order re-derives the permuted geo mask") {
    SceneRecipe recipe;
    recipe.seed = 31;
    const SceneObjects scene = generate_scene(recipe);
    const int n = scene.size();

    Rng rng(99);
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    rng.shuffle(perm);
    std::vector<SceneObject> shuffled(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        shuffled[static_cast<std::size_t>(i)] = scene.object(perm[static_cast<std::size_t>(i)]);
    }
    const SceneObjects permuted(std::move(shuffled));

    const BoolMat base = geo_object_mask(density_profile(scene, GeoParams{2, 10}).neighbors, n);
    const BoolMat after = geo_object_mask(density_profile(permuted, GeoParams{2, 10}).neighbors, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            CHECK(after.get(i, j) == base.get(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]));
        }
    }
}

TEST_CASE("descriptor resolution finds the unique nearest object") {
    // rep at origin, nearest is OBJ001
    const SceneObjects scene = testing::scene_from_points({{0, 0, 0}, {1, 0, 0}, {5, 0, 0}, {9, 0, 0}});
    CHECK(resolve_descriptor(scene, 0, 1) == 1);
    CHECK(resolve_descriptor(scene, 0, 2) == 2);
    CHECK_THROWS_AS(resolve_descriptor(scene, 0, 7), ConfigError);

    // exact tie at the deciding boundary is ambiguous
    const SceneObjects tied = testing::scene_from_points({{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}});
    CHECK_THROWS_AS(resolve_descriptor(tied, 0, 1), GenerationError);
}

TEST_CASE("grounding tasks are well-formed and unique") {
    SceneRecipe recipe;
    recipe.seed = 5;
    int checked = 0;
    for (int t = 0; t < 100; ++t) {
        recipe.seed = static_cast<std::uint64_t>(t);
        const SceneObjects scene = generate_scene(recipe);
        const GroundingTask task = generate_grounding_task(scene, static_cast<std::uint64_t>(t) + 1000);
        const int n = scene.size();
        REQUIRE(task.layout.n_objects() == n);
        REQUIRE(static_cast<int>(task.tokens.size()) == task.layout.total());

        // identifier tokens are distinct pool ids
        std::vector<int> ids = task.id_tokens;
        std::sort(ids.begin(), ids.end());
        CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
        CHECK(ids.front() >= 0);
        CHECK(ids.back() < vocab::id_pool);

        // instruction encodes the representative; target matches the resolver
        const SegmentSpans spans = segment_spans(task.layout);
        CHECK(task.tokens[static_cast<std::size_t>(spans.instruction.begin)] == vocab::ask);
        CHECK(task.tokens[static_cast<std::size_t>(spans.instruction.begin) + 1] ==
              task.id_tokens[static_cast<std::size_t>(task.rep_index)]);
        const int resolved = resolve_descriptor(task.scene, task.rep_index, task.rank);
        CHECK(resolved == task.target_index);
        CHECK(task.targets[static_cast<std::size_t>(spans.response.begin)] ==
              task.id_tokens[static_cast<std::size_t>(task.target_index)]);
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("grounding task is deterministic and seed-sensitive") {
    SceneRecipe recipe;
    recipe.seed = 17;
    const SceneObjects scene = generate_scene(recipe);
    const GroundingTask a = generate_grounding_task(scene, 3);
    const GroundingTask b = generate_grounding_task(scene, 3);
    CHECK(a.tokens == b.tokens);
    CHECK(a.targets == b.targets);
    CHECK(a.rep_index == b.rep_index);
}

TEST_SUITE_END();
