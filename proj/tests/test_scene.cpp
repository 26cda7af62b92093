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

#include <fstream>

#include "slim/error.hpp"
#include "slim/layout.hpp"
#include "slim/scene.hpp"
#include "testing.hpp"

using namespace slim;

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

} // namespace

TEST_SUITE_BEGIN("scene");

TEST_CASE("scene file loads with order preserved") {
    testing::TempFile f("scene");
    write_file(f.path(), "SLIMSCENE v1 2\nOBJ000 0 0 0\nOBJ001 1 0 0\n");
    const SceneObjects scene = load_scene(f.path());
    CHECK(scene.size() == 2);
    CHECK(scene.object(0).id == "OBJ000");
    CHECK(scene.object(1).id == "OBJ001");
    CHECK(scene.center(1).x == 1.0);
}

TEST_CASE("duplicate object id rejected") {
    testing::TempFile f("scene_dup");
    write_file(f.path(), "SLIMSCENE v1 2\nOBJ000 0 0 0\nOBJ000 1 0 0\n");
    CHECK_THROWS_AS(load_scene(f.path()), ParseError);
    CHECK_THROWS_WITH_AS(load_scene(f.path()), doctest::Contains("duplicate"), ParseError);
}

TEST_CASE("non-finite coordinate rejected") {
    testing::TempFile f("scene_nan");
    write_file(f.path(), "SLIMSCENE v1 1\nOBJ000 NaN 0 0\n");
    CHECK_THROWS_WITH_AS(load_scene(f.path()), doctest::Contains("non-finite"), ParseError);
}

TEST_CASE("parse errors carry line context") {
    testing::TempFile f("scene_bad");
    write_file(f.path(), "SLIMSCENE v1 2\nOBJ000 0 0 0\nOBJ001 zero 0 0\n");
    CHECK_THROWS_WITH_AS(load_scene(f.path()), doctest::Contains(":3"), ParseError);

    testing::TempFile g("scene_short");
    write_file(g.path(), "SLIMSCENE v1 3\nOBJ000 0 0 0\n");
    CHECK_THROWS_AS(load_scene(g.path()), ParseError);

    testing::TempFile h("scene_hdr");
    write_file(h.path(), "SCENE v1 1\nOBJ000 0 0 0\n");
    CHECK_THROWS_AS(load_scene(h.path()), ParseError);
}

TEST_CASE("save then load is the identity") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const SceneObjects scene = testing::random_scene(rng, rng.uniform_int(1, 40));
        testing::TempFile f("scene_rt");
        save_scene(scene, f.path());
        CHECK(load_scene(f.path()) == scene);
    }
}

TEST_CASE("layout invariants") {
    CHECK_THROWS_AS(TokenLayout(1, 2, 0, 1, 1), ConfigError);
    CHECK_THROWS_AS(TokenLayout(-1, 2, 1, 1, 1), ConfigError);
    CHECK_THROWS_AS(TokenLayout(0, 0, 1, 0, 0), ConfigError); // empty sequence
    const TokenLayout layout(2, 3, 2, 4, 1);
    CHECK(layout.n_object_tokens() == 6);
    CHECK(layout.total() == 13);
    CHECK(layout.object_of(1) == -1);
    CHECK(layout.object_of(2) == 0);
    CHECK(layout.object_of(7) == 2);
    CHECK(layout.object_of(8) == -1);
}

TEST_CASE("segment spans match the worked examples") {
    {
        const SegmentSpans s = segment_spans(TokenLayout(2, 2, 1, 3, 0));
        CHECK(s.system == Span{0, 2});
        CHECK(s.objects[0] == Span{2, 3});
        CHECK(s.objects[1] == Span{3, 4});
        CHECK(s.instruction == Span{4, 7});
        CHECK(s.response.size() == 0);
    }
    {
        const SegmentSpans s = segment_spans(TokenLayout(0, 2, 3, 0, 0));
        CHECK(s.objects[0] == Span{0, 3});
        CHECK(s.objects[1] == Span{3, 6});
    }
    {
        const SegmentSpans s = segment_spans(TokenLayout(0, 1, 1, 0, 0));
        CHECK(s.objects[0] == Span{0, 1});
        CHECK(s.total == 1);
    }
}

TEST_CASE("segment spans partition [0, n) for random layouts") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int ns = rng.uniform_int(0, 5);
        const int no = rng.uniform_int(0, 8);
        const int tpo = rng.uniform_int(1, 4);
        const int ni = rng.uniform_int(0, 5);
        const int nr = rng.uniform_int(0, 5);
        if (ns + no + ni + nr == 0) continue;
        const TokenLayout layout(ns, no, tpo, ni, nr);
        const SegmentSpans s = segment_spans(layout);
        std::vector<int> covered(static_cast<std::size_t>(layout.total()), 0);
        auto mark = [&](Span span) {
            for (int p = span.begin; p < span.end; ++p) covered[static_cast<std::size_t>(p)] += 1;
        };
        mark(s.system);
        for (const Span& o : s.objects) mark(o);
        mark(s.instruction);
        mark(s.response);
        for (int c : covered) CHECK(c == 1);
        CHECK(s.total == layout.total());
        CHECK(s.object_tokens.size() == layout.n_object_tokens());
    }
}

TEST_CASE("layout file round-trip") {
    const TokenLayout layout(2, 12, 1, 3, 1);
    testing::TempFile f("layout");
    save_layout(layout, f.path());
    CHECK(load_layout(f.path()) == layout);

    testing::TempFile g("layout_bad");
    write_file(g.path(), "SLIMLAYOUT v1\nsystem=2\nobjects=3\n");
    CHECK_THROWS_AS(load_layout(g.path()), ParseError);
}

TEST_SUITE_END();
