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

#include "slim/scene_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "slim/error.hpp"
#include "slim/rng.hpp"

namespace slim {

void validate(const SceneRecipe& recipe) {
    if (recipe.n_clusters < 1) throw ConfigError("recipe needs at least one cluster");
    if (recipe.per_cluster_min < 1 || recipe.per_cluster_max < recipe.per_cluster_min) {
        throw ConfigError("objects_per_cluster range invalid");
    }
    if (!(recipe.cluster_radius > 0.0) || !(recipe.cluster_spacing > 0.0)) {
        throw ConfigError("cluster radius and spacing must be positive");
    }
    if (recipe.outlier_count < 0) throw ConfigError("outlier count must be non-negative");
    if (recipe.cluster_spacing > 1e12 || recipe.cluster_radius > 1e12) {
        throw GenerationError("recipe scales exceed the supported numeric range");
    }
}

namespace {

double dist3(const Point3& a, const Point3& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Point3 ball_point(Rng& rng, const Point3& center, double radius) {
    // uniform in the ball: gaussian direction, cube-root radial profile
    double x, y, z, norm;
    do {
        x = rng.normal();
        y = rng.normal();
        z = rng.normal();
        norm = std::sqrt(x * x + y * y + z * z);
    } while (norm < 1e-12);
    const double r = radius * std::cbrt(rng.uniform());
    return {center.x + r * x / norm, center.y + r * y / norm, center.z + r * z / norm};
}

} // namespace

SceneObjects generate_scene(const SceneRecipe& recipe) {
    validate(recipe);
    Rng rng(derive_seed(recipe.seed, 0xC0FFEE));

    // anchors by rejection inside a box that grows with the cluster count
    const double box = recipe.cluster_spacing * (2.0 + 1.6 * std::cbrt(static_cast<double>(recipe.n_clusters)));
    std::vector<Point3> anchors;
    int attempts = 0;
    const int max_attempts = 20000 * recipe.n_clusters;
    while (static_cast<int>(anchors.size()) < recipe.n_clusters) {
        if (++attempts > max_attempts) {
            throw GenerationError("could not place " + std::to_string(recipe.n_clusters) +
                                  " anchors at spacing " + std::to_string(recipe.cluster_spacing));
        }
        Point3 cand{rng.uniform(-box, box), rng.uniform(-box, box), rng.uniform(-box, box)};
        bool ok = true;
        for (const Point3& a : anchors) {
            if (dist3(cand, a) < recipe.cluster_spacing) {
                ok = false;
                break;
            }
        }
        if (ok) anchors.push_back(cand);
    }

    // deterministic interleave of the size range (min, max, min+1, max-1, ...)
    // so every scene carries both sparse and dense clusters
    std::vector<Point3> centers;
    for (int c = 0; c < recipe.n_clusters; ++c) {
        const int count = (c % 2 == 0) ? std::min(recipe.per_cluster_min + c / 2, recipe.per_cluster_max)
                                       : std::max(recipe.per_cluster_max - c / 2, recipe.per_cluster_min);
        for (int m = 0; m < count; ++m) {
            centers.push_back(ball_point(rng, anchors[static_cast<std::size_t>(c)], recipe.cluster_radius));
        }
    }

    // outliers: well beyond every anchor
    Point3 centroid{0, 0, 0};
    for (const Point3& a : anchors) {
        centroid.x += a.x / recipe.n_clusters;
        centroid.y += a.y / recipe.n_clusters;
        centroid.z += a.z / recipe.n_clusters;
    }
    for (int o = 0; o < recipe.outlier_count; ++o) {
        Point3 p;
        int tries = 0;
        while (true) {
            if (++tries > 20000) {
                throw GenerationError("could not place outlier " + std::to_string(o));
            }
            double x, y, z, norm;
            do {
                x = rng.normal();
                y = rng.normal();
                z = rng.normal();
                norm = std::sqrt(x * x + y * y + z * z);
            } while (norm < 1e-12);
            const double r = recipe.cluster_spacing * rng.uniform(2.0, 3.0);
            p = {centroid.x + r * x / norm, centroid.y + r * y / norm, centroid.z + r * z / norm};
            bool far = true;
            for (const Point3& a : anchors) {
                if (dist3(p, a) < 1.5 * recipe.cluster_spacing) {
                    far = false;
                    break;
                }
            }
            if (far) break;
        }
        centers.push_back(p);
    }

    // irrational-step jitter so exact distance ties cannot survive
    const double eps = 1e-9 * std::max(1.0, recipe.cluster_spacing);
    for (std::size_t i = 0; i < centers.size(); ++i) {
        const double t = static_cast<double>(i + 1);
        centers[i].x += eps * std::fmod(t * 0.6180339887498949, 1.0);
        centers[i].y += eps * std::fmod(t * 0.4142135623730951, 1.0);
        centers[i].z += eps * std::fmod(t * 0.7320508075688772, 1.0);
    }

    // shuffled order, ids assigned afterwards: order carries no geometry
    rng.shuffle(centers);
    std::vector<SceneObject> objects;
    objects.reserve(centers.size());
    for (std::size_t i = 0; i < centers.size(); ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "OBJ%03zu", i);
        objects.push_back({id, centers[i]});
    }
    return SceneObjects(std::move(objects));
}

SceneRecipe load_recipe(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open recipe file '" + path.string() + "'");
    }
    SceneRecipe recipe;
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected key=value, got '" + line +
                             "'");
        }
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto get_int = [&](const char* key, int fallback) {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        try {
            return std::stoi(it->second);
        } catch (const std::exception&) {
            throw ParseError(path.string() + ": cannot parse integer for key '" + std::string(key) + "'");
        }
    };
    auto get_double = [&](const char* key, double fallback) {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        try {
            return std::stod(it->second);
        } catch (const std::exception&) {
            throw ParseError(path.string() + ": cannot parse number for key '" + std::string(key) + "'");
        }
    };
    recipe.n_clusters = get_int("n_clusters", recipe.n_clusters);
    recipe.per_cluster_min = get_int("per_cluster_min", recipe.per_cluster_min);
    recipe.per_cluster_max = get_int("per_cluster_max", recipe.per_cluster_max);
    recipe.cluster_radius = get_double("cluster_radius", recipe.cluster_radius);
    recipe.cluster_spacing = get_double("cluster_spacing", recipe.cluster_spacing);
    recipe.outlier_count = get_int("outlier_count", recipe.outlier_count);
    recipe.seed = static_cast<std::uint64_t>(get_int("seed", static_cast<int>(recipe.seed)));
    validate(recipe);
    return recipe;
}

void save_recipe(const SceneRecipe& recipe, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot open '" + path.string() + "' for writing");
    }
    out << "n_clusters=" << recipe.n_clusters << "\n";
    out << "per_cluster_min=" << recipe.per_cluster_min << "\n";
    out << "per_cluster_max=" << recipe.per_cluster_max << "\n";
    out << "cluster_radius=" << recipe.cluster_radius << "\n";
    out << "cluster_spacing=" << recipe.cluster_spacing << "\n";
    out << "outlier_count=" << recipe.outlier_count << "\n";
    out << "seed=" << recipe.seed << "\n";
}

int resolve_descriptor(const SceneObjects& scene, int rep_index, int rank) {
    const int n = scene.size();
    if (rep_index < 0 || rep_index >= n) throw ConfigError("descriptor names an unknown object");
    if (rank < 1 || rank > n - 1) throw ConfigError("descriptor rank out of range");

    std::vector<std::pair<double, int>> by_distance;
    for (int j = 0; j < n; ++j) {
        if (j != rep_index) by_distance.emplace_back(dist3(scene.center(rep_index), scene.center(j)), j);
    }
    std::sort(by_distance.begin(), by_distance.end());
    // unique answer requires a strict gap at the deciding boundary
    const std::size_t pick = static_cast<std::size_t>(rank - 1);
    if (pick > 0 && by_distance[pick].first == by_distance[pick - 1].first) {
        throw GenerationError("ambiguous descriptor: distance tie at rank " + std::to_string(rank));
    }
    if (pick + 1 < by_distance.size() && by_distance[pick].first == by_distance[pick + 1].first) {
        throw GenerationError("ambiguous descriptor: distance tie at rank " + std::to_string(rank));
    }
    return by_distance[pick].second;
}

GroundingTask generate_grounding_task(const SceneObjects& scene, std::uint64_t seed) {
    const int n = scene.size();
    if (n < 2) throw ConfigError("grounding task needs at least two objects");
    if (n > vocab::id_pool) {
        throw ConfigError("scene has " + std::to_string(n) + " objects but the identifier pool holds " +
                          std::to_string(vocab::id_pool));
    }

    // Pair members make the cleanest references: objects whose 1m-ball holds
    // exactly one other object. Falls back to the tightest nearest-neighbor
    // pair when a scene has no isolated pairs.
    std::vector<int> pair_members;
    int tightest = 0;
    double tightest_d = 1e300;
    for (int i = 0; i < n; ++i) {
        int close = 0;
        double nn = 1e300;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d = distance(scene.center(i), scene.center(j));
            if (d <= 1.0) ++close;
            nn = std::min(nn, d);
        }
        if (close == 1) pair_members.push_back(i);
        if (nn < tightest_d) {
            tightest_d = nn;
            tightest = i;
        }
    }

    for (std::uint64_t attempt = 0; attempt < 16; ++attempt) {
        Rng rng(derive_seed(seed + attempt, 0x7A5C));
        const int rep = pair_members.empty()
                            ? tightest
                            : pair_members[static_cast<std::size_t>(
                                  rng.uniform_int(0, static_cast<int>(pair_members.size()) - 1))];
        const int rank = 1;
        int target = -1;
        try {
            target = resolve_descriptor(scene, rep, rank);
        } catch (const GenerationError&) {
            continue; // ambiguous, next derived seed
        }

        std::vector<int> ids(vocab::id_pool);
        for (int i = 0; i < vocab::id_pool; ++i) ids[static_cast<std::size_t>(i)] = i;
        rng.shuffle(ids);
        ids.resize(static_cast<std::size_t>(n));

        // identifier + feature token per object
        GroundingTask task{scene, TokenLayout(1, n, 2, 3, 1), {}, {}, ids, rep, target, rank};
        const int total = task.layout.total();
        task.tokens.resize(static_cast<std::size_t>(total));
        task.targets.assign(static_cast<std::size_t>(total), -1);

        int cursor = 0;
        task.tokens[cursor++] = vocab::sys;
        for (int i = 0; i < n; ++i) {
            task.tokens[cursor++] = ids[static_cast<std::size_t>(i)];
            task.tokens[cursor++] = vocab::object_feature;
        }
        task.tokens[cursor++] = vocab::ask;
        task.tokens[cursor++] = ids[static_cast<std::size_t>(rep)];
        task.tokens[cursor++] = vocab::rank_base + (rank - 1);
        task.tokens[cursor] = vocab::answer_slot;
        task.targets[static_cast<std::size_t>(cursor)] = ids[static_cast<std::size_t>(target)];
        return task;
    }
    throw GenerationError("could not build an unambiguous grounding task");
}

} // namespace slim
