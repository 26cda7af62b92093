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

#include "slim/error.hpp"
#include "slim/mask.hpp"
#include "testing.hpp"

using namespace slim;

TEST_SUITE_BEGIN("mask");

TEST_CASE("strategy mini-grammar") {
    CHECK(MaskStrategy::parse("causal").kind == MaskKind::Causal);
    CHECK(MaskStrategy::parse("fullall").kind == MaskKind::FullAll);
    CHECK(MaskStrategy::parse("full").kind == MaskKind::FullObjectBlock);
    CHECK(MaskStrategy::parse("diag").kind == MaskKind::DiagonalObjectBlock);
    CHECK(MaskStrategy::parse("fixedn:7").n_fixed == 7);
    CHECK(MaskStrategy::parse("geo").kind == MaskKind::Geo);
    CHECK(MaskStrategy::parse("geo+inst").inst);
    CHECK_FALSE(MaskStrategy::parse("geo").inst);
    CHECK(MaskStrategy::parse("causal+inst").str() == "causal+inst");
    CHECK(MaskStrategy::parse("fixedn:5").str() == "fixedn:5");
    CHECK_THROWS_AS(MaskStrategy::parse("triangular"), ConfigError);
    CHECK_THROWS_AS(MaskStrategy::parse("fixedn:x"), ConfigError);
    CHECK_THROWS_AS(MaskStrategy::parse("fixedn:0"), ConfigError);
}

TEST_CASE("causal mask basics") {
    const AttentionMask one = causal_mask(1);
    CHECK(one.allow(0, 0));

    const AttentionMask three = causal_mask(3);
    int allowed = 0;
    for (int p = 0; p < 3; ++p) {
        for (int q = 0; q < 3; ++q) {
            CHECK(three.allow(p, q) == (q <= p));
            allowed += three.allow(p, q) ? 1 : 0;
        }
    }
    CHECK(allowed == 6);
}

TEST_CASE("causal popcount is n(n+1)/2") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = rng.uniform_int(1, 120);
        CHECK(causal_mask(n).matrix().popcount() == static_cast<long long>(n) * (n + 1) / 2);
    }
}

TEST_CASE("zero-width object segment composes to pure causal") {
    Rng rng(22);
    const SceneObjects scene = testing::random_scene(rng, 5);
    const TokenLayout layout(3, 0, 1, 4, 2);
    for (const char* spec : {"causal", "full", "diag", "fixedn:5", "geo", "geo+inst"}) {
        CHECK(compose(scene, layout, MaskStrategy::parse(spec)) == causal_mask(layout));
    }
}

TEST_CASE("scene/layout object count mismatch is a configuration error") {
    Rng rng(23);
    const SceneObjects scene = testing::random_scene(rng, 5);
    CHECK_THROWS_AS(compose(scene, TokenLayout(2, 4, 1, 3, 1), MaskStrategy::parse("geo")), ConfigError);
}

TEST_CASE("geo+inst structural layout: instruction columns open up, rest stays causal") {
    Rng rng(24);
    const int n_obj = 12;
    const SceneObjects scene = testing::random_scene(rng, n_obj);
    const TokenLayout layout(2, n_obj, 1, 3, 2);
    const SegmentSpans spans = segment_spans(layout);
    const MaskStrategy strategy = MaskStrategy::parse("geo+inst");
    const AttentionMask mask = compose(scene, layout, strategy);
    const AttentionMask base = causal_mask(layout);

    int gained_inst = 0;
    for (int p = 0; p < layout.total(); ++p) {
        for (int q = 0; q < layout.total(); ++q) {
            const bool in_obj_block = spans.object_tokens.contains(p) && spans.object_tokens.contains(q);
            const bool in_inst_block = spans.object_tokens.contains(p) && spans.instruction.contains(q);
            if (in_inst_block) {
                CHECK(mask.allow(p, q));
                gained_inst += mask.allow(p, q) && !base.allow(p, q) ? 1 : 0;
            } else if (!in_obj_block) {
                CHECK(mask.allow(p, q) == base.allow(p, q));
            }
        }
    }
    CHECK(gained_inst == n_obj * 3); // every object row gains every instruction column
}

TEST_CASE("diagonal strategy blocks inter-object attention both ways") {
    Rng rng(25);
    const SceneObjects scene = testing::random_scene(rng, 4);
    const TokenLayout layout(1, 4, 2, 2, 1);
    const SegmentSpans spans = segment_spans(layout);
    const AttentionMask mask = compose(scene, layout, MaskStrategy::parse("diag"));
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            for (int p = spans.objects[i].begin; p < spans.objects[i].end; ++p) {
                for (int q = spans.objects[j].begin; q < spans.objects[j].end; ++q) {
                    CHECK(mask.allow(p, q) == (i == j));
                }
            }
        }
    }
}

TEST_CASE("fullall is literally all-true") {
    Rng rng(26);
    const SceneObjects scene = testing::random_scene(rng, 3);
    const TokenLayout layout(2, 3, 1, 2, 1);
    const AttentionMask mask = compose(scene, layout, MaskStrategy::parse("fullall"));
    CHECK(mask.matrix().popcount() == static_cast<long long>(layout.total()) * layout.total());
}

TEST_CASE("diagonal always true; no row all-false") {
    Rng rng(27);
    for (int trial = 0; trial < 40; ++trial) {
        const int n_obj = rng.uniform_int(1, 16);
        const SceneObjects scene = testing::random_scene(rng, n_obj);
        const TokenLayout layout(rng.uniform_int(0, 3), n_obj, rng.uniform_int(1, 3), rng.uniform_int(0, 4),
                                 rng.uniform_int(0, 3));
        for (const char* spec : {"causal", "fullall", "full", "diag", "fixedn:5", "geo", "geo+inst"}) {
            const AttentionMask mask = compose(scene, layout, MaskStrategy::parse(spec));
            for (int p = 0; p < layout.total(); ++p) {
                CHECK(mask.allow(p, p));
                bool any = false;
                for (int q = 0; q < layout.total() && !any; ++q) any = mask.allow(p, q);
                CHECK(any);
            }
        }
    }
}

TEST_CASE("geo with k_min=k_max=N-1 equals the full object block") {
    Rng rng(28);
    for (int trial = 0; trial < 15; ++trial) {
        const int n_obj = rng.uniform_int(2, 20);
        const SceneObjects scene = testing::random_scene(rng, n_obj);
        const TokenLayout layout(2, n_obj, 1, 3, 1);
        MaskStrategy geo = MaskStrategy::parse("geo");
        geo.geo = {n_obj - 1, n_obj - 1};
        CHECK(compose(scene, layout, geo) == compose(scene, layout, MaskStrategy::parse("full")));
    }
}

TEST_CASE("fixedn:k equals geo with k_min=k_max=k on tie-free scenes") {
    Rng rng(29);
    for (int trial = 0; trial < 15; ++trial) {
        const int n_obj = rng.uniform_int(2, 20);
        const SceneObjects scene = testing::random_scene(rng, n_obj);
        const TokenLayout layout(1, n_obj, 1, 2, 1);
        const int k = rng.uniform_int(1, 8);
        MaskStrategy fixed = MaskStrategy::parse("fixedn:" + std::to_string(k));
        MaskStrategy geo = MaskStrategy::parse("geo");
        geo.geo = {k, k};
        CHECK(compose(scene, layout, fixed) == compose(scene, layout, geo));
    }
}

TEST_CASE("causal strategy without inst reproduces causal_mask exactly") {
    Rng rng(30);
    for (int tpo : {1, 2, 3}) {
        const SceneObjects scene = testing::random_scene(rng, 6);
        const TokenLayout layout(2, 6, tpo, 3, 2);
        CHECK(compose(scene, layout, MaskStrategy::parse("causal")) == causal_mask(layout));
    }
}

TEST_CASE("inst flag only touches the object-to-instruction block") {
    Rng rng(31);
    for (const char* spec : {"causal", "full", "diag", "fixedn:3", "geo"}) {
        const int n_obj = rng.uniform_int(2, 10);
        const SceneObjects scene = testing::random_scene(rng, n_obj);
        const TokenLayout layout(2, n_obj, 2, 3, 2);
        const SegmentSpans spans = segment_spans(layout);
        MaskStrategy without = MaskStrategy::parse(spec);
        MaskStrategy with = without;
        with.inst = true;
        const AttentionMask mask_without = compose(scene, layout, without);
        const AttentionMask mask_with = compose(scene, layout, with);
        for (int p = 0; p < layout.total(); ++p) {
            for (int q = 0; q < layout.total(); ++q) {
                if (mask_with.allow(p, q) != mask_without.allow(p, q)) {
                    CHECK(spans.object_tokens.contains(p));
                    CHECK(spans.instruction.contains(q));
                }
            }
        }
    }
}

TEST_CASE("multi-token objects broadcast the per-pair decision") {
    Rng rng(32);
    const int n_obj = 5;
    const SceneObjects scene = testing::random_scene(rng, n_obj);
    const TokenLayout wide(1, n_obj, 3, 2, 1);
    const TokenLayout narrow(1, n_obj, 1, 2, 1);
    const MaskStrategy strategy = MaskStrategy::parse("geo");
    const AttentionMask wide_mask = compose(scene, wide, strategy);
    const AttentionMask narrow_mask = compose(scene, narrow, strategy);
    const SegmentSpans ws = segment_spans(wide);
    const SegmentSpans ns = segment_spans(narrow);
    for (int i = 0; i < n_obj; ++i) {
        for (int j = 0; j < n_obj; ++j) {
            const bool expect = narrow_mask.allow(ns.objects[i].begin, ns.objects[j].begin);
            for (int p = ws.objects[i].begin; p < ws.objects[i].end; ++p) {
                for (int q = ws.objects[j].begin; q < ws.objects[j].end; ++q) {
                    CHECK(wide_mask.allow(p, q) == expect);
                }
            }
        }
    }
    // intra-object blocks are always fully connected under block strategies
    for (int i = 0; i < n_obj; ++i) {
        for (int p = ws.objects[i].begin; p < ws.objects[i].end; ++p) {
            for (int q = ws.objects[i].begin; q < ws.objects[i].end; ++q) {
                CHECK(wide_mask.allow(p, q));
            }
        }
    }
}

TEST_CASE("sparsity stats worked examples") {
    {
        const SparsityReport report = sparsity_stats(causal_mask(4));
        CHECK(report.total_allowed == 10);
        CHECK_FALSE(report.has_object_block);
    }
    {
        // five objects on a line, k forced to 2 via k_min=k_max=2
        const SceneObjects scene =
            testing::scene_from_points({{0, 0, 0}, {1, 0, 0}, {2.1, 0, 0}, {3.3, 0, 0}, {4.8, 0, 0}});
        const TokenLayout layout(0, 5, 1, 0, 1);
        MaskStrategy geo = MaskStrategy::parse("geo");
        geo.geo = {2, 2};
        const SparsityReport report = sparsity_stats(compose(scene, layout, geo));
        const int obj = static_cast<int>(Segment::Objects);
        CHECK(report.block_allowed[obj][obj] == 15);
        CHECK(report.object_block_density == doctest::Approx(0.6));
        for (int degree : report.object_out_degree) CHECK(degree == 2);
    }
    {
        Rng rng(33);
        const SceneObjects scene = testing::random_scene(rng, 5);
        const TokenLayout layout(1, 5, 1, 2, 1);
        const SparsityReport report = sparsity_stats(compose(scene, layout, MaskStrategy::parse("full")));
        CHECK(report.object_block_density == 1.0);
    }
}

TEST_CASE("geo sparsity density matches (N + sum k) / N^2") {
    Rng rng(34);
    for (int tpo : {1, 2}) {
        const int n_obj = rng.uniform_int(4, 24);
        const SceneObjects scene = testing::random_scene(rng, n_obj);
        const TokenLayout layout(2, n_obj, tpo, 3, 1);
        const DensityProfile profile = density_profile(scene, GeoParams{2, 10});
        long long k_sum = 0;
        for (int k : profile.k) k_sum += k;
        const SparsityReport report = sparsity_stats(compose(scene, layout, MaskStrategy::parse("geo")));
        const double expect = static_cast<double>(n_obj + k_sum) / (static_cast<double>(n_obj) * n_obj);
        CHECK(report.object_block_density == doctest::Approx(expect).epsilon(1e-12));
        for (int i = 0; i < n_obj; ++i) {
            CHECK(report.object_out_degree[static_cast<std::size_t>(i)] == profile.k[static_cast<std::size_t>(i)]);
        }
    }
}

TEST_CASE("SLIMMASK round-trip is bit exact") {
    Rng rng(35);
    const int n_obj = 7;
    const SceneObjects scene = testing::random_scene(rng, n_obj);
    const TokenLayout layout(2, n_obj, 1, 3, 2);
    const AttentionMask mask = compose(scene, layout, MaskStrategy::parse("geo+inst"));
    testing::TempFile f("mask");
    save_mask(mask, f.path());
    const BoolMat loaded = load_mask_matrix(f.path());
    CHECK(loaded == mask.matrix());
    CHECK(attach_layout(loaded, layout) == mask);
    CHECK_THROWS_AS(attach_layout(loaded, TokenLayout(1, 1, 1, 1, 1)), ConfigError);
}

TEST_SUITE_END();
