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

#include <cmath>

#include "slim/attention.hpp"
#include "slim/error.hpp"
#include "testing.hpp"

using namespace slim;

namespace {

// Scalar-loop reference: per-row softmax over the allowed set, no shared code
// with the kernels under test.
Mat reference_attention(const Mat& q, const Mat& k, const Mat& v, const AttentionMask& mask) {
    const int n = mask.size();
    const int d = q.cols;
    Mat out(n, v.cols);
    for (int p = 0; p < n; ++p) {
        std::vector<double> weights(static_cast<std::size_t>(n), 0.0);
        double mx = -1e308;
        for (int c = 0; c < n; ++c) {
            if (!mask.allow(p, c)) continue;
            double s = 0.0;
            for (int t = 0; t < d; ++t) s += q[p][t] * k[c][t];
            s /= std::sqrt(static_cast<double>(d));
            weights[static_cast<std::size_t>(c)] = s;
            mx = std::max(mx, s);
        }
        double z = 0.0;
        for (int c = 0; c < n; ++c) {
            if (mask.allow(p, c)) z += std::exp(weights[static_cast<std::size_t>(c)] - mx);
        }
        for (int c = 0; c < n; ++c) {
            if (!mask.allow(p, c)) continue;
            const double w = std::exp(weights[static_cast<std::size_t>(c)] - mx) / z;
            for (int t = 0; t < v.cols; ++t) out[p][t] += w * v[c][t];
        }
    }
    return out;
}

Mat random_mat(Rng& rng, int rows, int cols) {
    Mat m(rows, cols);
    for (double& v : m.data) v = rng.normal();
    return m;
}

} // namespace

TEST_SUITE_BEGIN("attention");

TEST_CASE("single token: weight 1, output equals V") {
    Mat q(1, 4), k(1, 4), v(1, 4);
    Rng rng(1);
    for (double& x : q.data) x = rng.normal();
    for (double& x : k.data) x = rng.normal();
    for (double& x : v.data) x = rng.normal();
    const AttentionMask mask = causal_mask(1);
    Mat probs;
    masked_attention_probs(q, k, mask, probs);
    CHECK(probs[0][0] == 1.0);
    const Mat out = masked_attention(q, k, v, mask);
    for (int t = 0; t < 4; ++t) CHECK(out[0][t] == v[0][t]);
}

TEST_CASE("identical rows under a full mask give uniform weights") {
    Mat q(3, 4), k(3, 4);
    Rng rng(2);
    for (int t = 0; t < 4; ++t) {
        const double qv = rng.normal();
        const double kv = rng.normal();
        for (int p = 0; p < 3; ++p) {
            q[p][t] = qv;
            k[p][t] = kv;
        }
    }
    AttentionMask full = causal_mask(3);
    for (int p = 0; p < 3; ++p) {
        for (int c = 0; c < 3; ++c) full.set_allow(p, c, true);
    }
    Mat probs;
    masked_attention_probs(q, k, full, probs);
    for (int p = 0; p < 3; ++p) {
        for (int c = 0; c < 3; ++c) {
            CHECK(probs[p][c] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("random 4x8 causal case matches the scalar reference to 1e-12") {
    Rng rng(3);
    const Mat q = random_mat(rng, 4, 8);
    const Mat k = random_mat(rng, 4, 8);
    const Mat v = random_mat(rng, 4, 8);
    const AttentionMask mask = causal_mask(4);
    const Mat out = masked_attention(q, k, v, mask);
    const Mat expect = reference_attention(q, k, v, mask);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        CHECK(out.data[i] == doctest::Approx(expect.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("rows are probability distributions; blocked entries exactly zero") {
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = rng.uniform_int(2, 40);
        AttentionMask mask = causal_mask(n);
        // open random extra entries to leave pure-causal territory
        for (int extra = 0; extra < n; ++extra) {
            mask.set_allow(rng.uniform_int(0, n - 1), rng.uniform_int(0, n - 1), true);
        }
        const Mat q = random_mat(rng, n, 8);
        const Mat k = random_mat(rng, n, 8);
        Mat probs;
        masked_attention_probs(q, k, mask, probs);
        for (int p = 0; p < n; ++p) {
            double sum = 0.0;
            for (int c = 0; c < n; ++c) {
                if (!mask.allow(p, c)) CHECK(probs[p][c] == 0.0);
                CHECK(probs[p][c] >= 0.0);
                sum += probs[p][c];
            }
            CHECK(std::abs(sum - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("dense and sparse paths agree bit for bit") {
    Rng rng(5);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = rng.uniform_int(2, 64);
        AttentionMask mask = causal_mask(n);
        for (int extra = 0; extra < 2 * n; ++extra) {
            mask.set_allow(rng.uniform_int(0, n - 1), rng.uniform_int(0, n - 1), true);
        }
        const Mat q = random_mat(rng, n, 16);
        const Mat k = random_mat(rng, n, 16);
        const Mat v = random_mat(rng, n, 16);
        const Mat dense = masked_attention(q, k, v, mask);
        const Mat sparse = masked_attention_sparse(q, k, v, MaskCsr::build(mask));
        for (std::size_t i = 0; i < dense.data.size(); ++i) {
            CHECK(dense.data[i] == sparse.data[i]);
        }
    }
}

TEST_CASE("an all-blocked row violates the contract") {
    AttentionMask mask = causal_mask(3);
    mask.set_allow(1, 0, false);
    mask.set_allow(1, 1, false);
    Rng rng(6);
    const Mat q = random_mat(rng, 3, 4);
    const Mat k = random_mat(rng, 3, 4);
    const Mat v = random_mat(rng, 3, 4);
    Mat probs;
    CHECK_THROWS_AS(masked_attention_probs(q, k, mask, probs), ContractViolation);
    CHECK_THROWS_AS(masked_attention(q, k, v, mask), ContractViolation);
    CHECK_THROWS_AS(masked_attention_sparse(q, k, v, MaskCsr::build(mask)), ContractViolation);
}

TEST_CASE("shape mismatches are configuration errors") {
    Rng rng(7);
    const Mat q = random_mat(rng, 3, 4);
    const Mat k = random_mat(rng, 3, 5);
    Mat probs;
    CHECK_THROWS_AS(masked_attention_probs(q, k, causal_mask(3), probs), ConfigError);
}

TEST_SUITE_END();
