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

#include "slim/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "slim/attention.hpp"
#include "slim/decoder.hpp"
#include "slim/error.hpp"
#include "slim/geo.hpp"
#include "slim/oracle.hpp"
#include "slim/rng.hpp"
#include "slim/scene_gen.hpp"

namespace slim {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

SceneObjects random_scene(Rng& rng, int n) {
    std::vector<SceneObject> objects;
    objects.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "OBJ%03d", i);
        objects.push_back({id, {rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)}});
    }
    return SceneObjects(std::move(objects));
}

TokenLayout random_layout(Rng& rng, int n_objects) {
    return TokenLayout(rng.uniform_int(0, 4), n_objects, rng.uniform_int(1, 3), rng.uniform_int(0, 6),
                       rng.uniform_int(0, 4));
}

void serialize_failure(const VerifyConfig& config, const SceneObjects& scene, const TokenLayout& layout,
                       const MaskStrategy& strategy, std::string& detail) {
    if (config.replay_dir.empty()) return;
    namespace fs = std::filesystem;
    fs::create_directories(config.replay_dir);
    const fs::path scene_path = fs::path(config.replay_dir) / "failcase.scn";
    const fs::path layout_path = fs::path(config.replay_dir) / "failcase.lay";
    save_scene(scene, scene_path);
    save_layout(layout, layout_path);
    detail += " [replay: " + scene_path.string() + ", " + layout_path.string() + ", strategy " + strategy.str() +
              "]";
}

} // namespace

std::vector<MaskStrategy> all_strategies() {
    std::vector<MaskStrategy> out;
    for (const char* base : {"causal", "fullall", "full", "diag", "fixedn:5", "geo"}) {
        MaskStrategy s = MaskStrategy::parse(base);
        out.push_back(s);
        s.inst = true;
        out.push_back(s);
    }
    return out;
}

std::vector<MaskStrategy> ablation_strategies() {
    std::vector<MaskStrategy> out;
    for (const char* spec :
         {"causal", "fullall", "full", "diag", "fixedn:5", "geo", "causal+inst", "geo+inst"}) {
        out.push_back(MaskStrategy::parse(spec));
    }
    return out;
}

SuiteResult run_oracle_equivalence(const VerifyConfig& config) {
    const auto t0 = Clock::now();
    SuiteResult result{"oracle-equivalence", true, 0, 0.0, ""};
    Rng rng(derive_seed(config.seed, 0x0AC1));
    const std::vector<MaskStrategy> strategies = all_strategies();
    for (int c = 0; c < config.cases; ++c) {
        const int n = rng.uniform_int(1, 64);
        const SceneObjects scene = random_scene(rng, n);
        const TokenLayout layout = random_layout(rng, n);
        for (const MaskStrategy& strategy : strategies) {
            const AttentionMask fast = compose(scene, layout, strategy);
            const AttentionMask reference = oracle::reference_mask(scene, layout, strategy);
            ++result.cases;
            if (!(fast == reference)) {
                result.pass = false;
                result.detail = "case " + std::to_string(c) + " strategy " + strategy.str() +
                                ": compose() differs from the reference mask";
                serialize_failure(config, scene, layout, strategy, result.detail);
                result.seconds = seconds_since(t0);
                return result;
            }
        }
    }
    result.seconds = seconds_since(t0);
    return result;
}

SuiteResult run_normalization_suite(const VerifyConfig& config) {
    const auto t0 = Clock::now();
    SuiteResult result{"density-normalization", true, 0, 0.0, ""};
    Rng rng(derive_seed(config.seed, 0x0AC2));
    for (int c = 0; c < config.cases; ++c) {
        const int n = rng.uniform_int(2, 64);
        const SceneObjects scene = random_scene(rng, n);
        const Mat d = pairwise_distances(scene);
        const Density density = local_density(d);
        double mn = 1e300, mx = -1e300;
        bool in_range = true;
        for (double r : density.rho_norm) {
            mn = std::min(mn, r);
            mx = std::max(mx, r);
            in_range = in_range && r >= -1e-12 && r <= 1.0 + 1e-12;
        }
        ++result.cases;
        if (!in_range || std::abs(mn) > 1e-12 || std::abs(mx - 1.0) > 1e-12) {
            result.pass = false;
            result.detail = "case " + std::to_string(c) + ": rho_norm range [" + std::to_string(mn) + ", " +
                            std::to_string(mx) + "]";
            result.seconds = seconds_since(t0);
            return result;
        }
    }
    result.seconds = seconds_since(t0);
    return result;
}

namespace {

SceneObjects transform_scene(const SceneObjects& scene, Rng& rng) {
    // random rotation (normalized quaternion), translation, uniform scale
    double qw = rng.normal(), qx = rng.normal(), qy = rng.normal(), qz = rng.normal();
    const double qn = std::sqrt(qw * qw + qx * qx + qy * qy + qz * qz);
    qw /= qn;
    qx /= qn;
    qy /= qn;
    qz /= qn;
    const double r00 = 1 - 2 * (qy * qy + qz * qz), r01 = 2 * (qx * qy - qz * qw), r02 = 2 * (qx * qz + qy * qw);
    const double r10 = 2 * (qx * qy + qz * qw), r11 = 1 - 2 * (qx * qx + qz * qz), r12 = 2 * (qy * qz - qx * qw);
    const double r20 = 2 * (qx * qz - qy * qw), r21 = 2 * (qy * qz + qx * qw), r22 = 1 - 2 * (qx * qx + qy * qy);
    const double s = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    const double tx = rng.uniform(-5.0, 5.0), ty = rng.uniform(-5.0, 5.0), tz = rng.uniform(-5.0, 5.0);

    std::vector<SceneObject> objects = scene.objects();
    for (SceneObject& o : objects) {
        const Point3 p = o.center;
        o.center = {s * (r00 * p.x + r01 * p.y + r02 * p.z) + tx, s * (r10 * p.x + r11 * p.y + r12 * p.z) + ty,
                    s * (r20 * p.x + r21 * p.y + r22 * p.z) + tz};
    }
    return SceneObjects(std::move(objects));
}

} // namespace

SuiteResult run_invariance_suite(const VerifyConfig& config) {
    const auto t0 = Clock::now();
    SuiteResult result{"geometric-invariance", true, 0, 0.0, ""};
    Rng rng(derive_seed(config.seed, 0x0AC3));
    const MaskStrategy geo = MaskStrategy::parse("geo+inst");
    for (int c = 0; c < config.cases; ++c) {
        const int n = rng.uniform_int(2, 64);
        const SceneObjects scene = random_scene(rng, n);
        const TokenLayout layout = random_layout(rng, n);
        ++result.cases;

        // rigid motion + scale: rho_norm within 1e-9, mask identical
        const SceneObjects moved = transform_scene(scene, rng);
        const Density base_density = local_density(pairwise_distances(scene));
        const Density moved_density = local_density(pairwise_distances(moved));
        for (int i = 0; i < n; ++i) {
            if (std::abs(base_density.rho_norm[static_cast<std::size_t>(i)] -
                         moved_density.rho_norm[static_cast<std::size_t>(i)]) > 1e-9) {
                result.pass = false;
                result.detail = "case " + std::to_string(c) + ": rho_norm drifted under rigid motion";
            }
        }
        const AttentionMask base_mask = compose(scene, layout, geo);
        if (!(base_mask == compose(moved, layout, geo))) {
            result.pass = false;
            result.detail = "case " + std::to_string(c) + ": geo mask changed under rigid motion/scale";
        }

        // permutation equivariance: Mask(P scene) == P Mask(scene) P^T
        std::vector<int> perm(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
        rng.shuffle(perm);
        std::vector<SceneObject> permuted(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            permuted[static_cast<std::size_t>(i)] = scene.object(perm[static_cast<std::size_t>(i)]);
        }
        const AttentionMask perm_mask = compose(SceneObjects(std::move(permuted)), layout, geo);

        const SegmentSpans spans = segment_spans(layout);
        const int total = layout.total();
        std::vector<int> sigma(static_cast<std::size_t>(total)); // permuted position -> base position
        for (int p = 0; p < total; ++p) sigma[static_cast<std::size_t>(p)] = p;
        for (int i = 0; i < n; ++i) {
            const Span dst = spans.objects[static_cast<std::size_t>(i)];
            const Span src = spans.objects[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
            for (int t = 0; t < dst.size(); ++t) sigma[static_cast<std::size_t>(dst.begin + t)] = src.begin + t;
        }
        bool equivariant = true;
        for (int p = 0; p < total && equivariant; ++p) {
            for (int q = 0; q < total && equivariant; ++q) {
                equivariant = perm_mask.allow(p, q) ==
                              base_mask.allow(sigma[static_cast<std::size_t>(p)], sigma[static_cast<std::size_t>(q)]);
            }
        }
        if (!equivariant) {
            result.pass = false;
            result.detail = "case " + std::to_string(c) + ": permutation equivariance violated";
        }
        if (!result.pass) {
            serialize_failure(config, scene, layout, geo, result.detail);
            result.seconds = seconds_since(t0);
            return result;
        }
    }
    result.seconds = seconds_since(t0);
    return result;
}

SuiteResult run_hyperparam_suite(const VerifyConfig& config) {
    const auto t0 = Clock::now();
    SuiteResult result{"neighborhood-bounds", true, 0, 0.0, ""};
    Rng rng(derive_seed(config.seed, 0x0AC4));
    const std::vector<GeoParams> bounds = {{0, 5}, {0, 10}, {2, 10}, {2, 20}};
    for (int c = 0; c < config.cases; ++c) {
        const int n = rng.uniform_int(2, 64);
        const SceneObjects scene = random_scene(rng, n);
        const TokenLayout layout(2, n, 1, 3, 1);
        ++result.cases;

        double last_density_kmin0 = -1.0, last_density_kmin2 = -1.0;
        for (const GeoParams& params : bounds) {
            const DensityProfile profile = density_profile(scene, params);
            const int k_min_eff = std::min(params.k_min, n - 1);
            const int k_max_eff = std::min(params.k_max, n - 1);
            for (int k : profile.k) {
                if (k < k_min_eff || k > k_max_eff) {
                    result.pass = false;
                    result.detail = "case " + std::to_string(c) + ": k=" + std::to_string(k) +
                                    " violates clamp for bounds (" + std::to_string(params.k_min) + "," +
                                    std::to_string(params.k_max) + ")";
                    result.seconds = seconds_since(t0);
                    return result;
                }
            }
            MaskStrategy strategy;
            strategy.kind = MaskKind::Geo;
            strategy.geo = params;
            const double density = sparsity_stats(compose(scene, layout, strategy)).object_block_density;
            double& last = params.k_min == 0 ? last_density_kmin0 : last_density_kmin2;
            if (last >= 0.0 && density < last - 1e-15) {
                result.pass = false;
                result.detail = "case " + std::to_string(c) + ": density not monotone in k_max at k_min=" +
                                std::to_string(params.k_min);
                result.seconds = seconds_since(t0);
                return result;
            }
            last = density;
        }
    }
    result.seconds = seconds_since(t0);
    return result;
}

SuiteResult run_attention_suite(const VerifyConfig& config) {
    const auto t0 = Clock::now();
    SuiteResult result{"attention-correctness", true, 0, 0.0, ""};
    Rng rng(derive_seed(config.seed, 0x0AC5));
    const std::vector<MaskStrategy> strategies = all_strategies();
    for (int c = 0; c < config.cases; ++c) {
        const int n_obj = rng.uniform_int(1, 24);
        const SceneObjects scene = random_scene(rng, n_obj);
        const TokenLayout layout(2, n_obj, 1, 3, 2);
        const MaskStrategy& strategy = strategies[static_cast<std::size_t>(c) % strategies.size()];
        const AttentionMask mask = compose(scene, layout, strategy);
        const int n = layout.total();
        const int d = 16;
        Mat q(n, d), k(n, d), v(n, d);
        for (double& value : q.data) value = rng.normal();
        for (double& value : k.data) value = rng.normal();
        for (double& value : v.data) value = rng.normal();

        Mat probs;
        masked_attention_probs(q, k, mask, probs);
        ++result.cases;
        for (int p = 0; p < n; ++p) {
            double sum = 0.0;
            for (int col = 0; col < n; ++col) {
                const double w = probs[p][col];
                if (!mask.allow(p, col) && w != 0.0) {
                    result.pass = false;
                    result.detail = "blocked entry carries weight at case " + std::to_string(c);
                }
                sum += w;
            }
            if (std::abs(sum - 1.0) > 1e-9) {
                result.pass = false;
                result.detail = "attention row " + std::to_string(p) + " sums to " + std::to_string(sum);
            }
        }

        const Mat dense = masked_attention(q, k, v, mask);
        const Mat sparse = masked_attention_sparse(q, k, v, MaskCsr::build(mask));
        double max_diff = 0.0;
        for (std::size_t i = 0; i < dense.data.size(); ++i) {
            max_diff = std::max(max_diff, std::abs(dense.data[i] - sparse.data[i]));
        }
        if (max_diff > 1e-12) {
            result.pass = false;
            result.detail = "dense and sparse paths differ by " + std::to_string(max_diff);
        }
        if (!result.pass) {
            result.seconds = seconds_since(t0);
            return result;
        }
    }
    result.seconds = seconds_since(t0);
    return result;
}

SuiteResult run_gradient_suite(const VerifyConfig& config) {
    const auto t0 = Clock::now();
    SuiteResult result{"gradient-check", true, 0, 0.0, ""};
    Rng rng(derive_seed(config.seed, 0x0AC6));

    DecoderConfig model;
    model.n_layers = 1;
    model.n_heads = 1;
    model.d_model = 4;
    model.d_head = 4;
    model.d_ff = 8;
    model.vocab_size = 8;
    model.max_positions = 8;

    const SceneObjects scene = random_scene(rng, 3);
    const TokenLayout layout(1, 3, 1, 1, 1);

    for (const MaskStrategy& strategy : all_strategies()) {
        SequenceBatch batch;
        batch.layout = layout;
        batch.mask = compose(scene, layout, strategy);
        batch.tokens = {0, 1, 2, 3, 4, 5};
        batch.targets.assign(6, -1);
        batch.targets[5] = 6;

        DecoderParams params = DecoderParams::random(model, derive_seed(config.seed, 0x6AD0));
        GradCheckOptions options;
        if (config.inject_gradient_fault) {
            // corrupt one W_V gradient coordinate; the check must name it
            for (const ParamView& view : params.views()) {
                if (view.name == "layer0.head0.wv") {
                    options.fault_index = view.offset;
                    options.fault_delta = 0.25;
                    break;
                }
            }
        }
        const GradCheckReport report = grad_check(params, batch, options);
        ++result.cases;
        if (!report.pass) {
            result.pass = false;
            std::ostringstream os;
            os << "strategy " << strategy.str() << ": worst rel err " << report.worst_rel;
            for (const GradCheckEntry& e : report.worst) {
                if (e.rel_err > options.tolerance) {
                    os << " [" << e.name << " analytic " << e.analytic << " numeric " << e.numeric << "]";
                    break;
                }
            }
            result.detail = os.str();
            result.seconds = seconds_since(t0);
            return result;
        }
    }
    result.seconds = seconds_since(t0);
    return result;
}

std::vector<SuiteResult> run_all_suites(const VerifyConfig& config) {
    std::vector<SuiteResult> results;
    results.push_back(run_oracle_equivalence(config));
    results.push_back(run_normalization_suite(config));
    results.push_back(run_invariance_suite(config));
    results.push_back(run_hyperparam_suite(config));
    results.push_back(run_attention_suite(config));
    results.push_back(run_gradient_suite(config));
    return results;
}

} // namespace slim
