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

#include "slim/attention.hpp"

#include <cmath>
#include <cstring>

#include "slim/error.hpp"

namespace slim {

namespace {

double dot(const double* a, const double* b, int d) {
    double s = 0.0;
    for (int t = 0; t < d; ++t) s += a[t] * b[t];
    return s;
}

void require_shapes(const Mat& q, const Mat& k, int n_mask) {
    if (q.rows != n_mask || k.rows != n_mask || q.cols != k.cols || q.cols < 1) {
        throw ConfigError("attention shape mismatch: Q " + std::to_string(q.rows) + "x" + std::to_string(q.cols) +
                          ", K " + std::to_string(k.rows) + "x" + std::to_string(k.cols) + ", mask n=" +
                          std::to_string(n_mask));
    }
}

void require_no_blocked_rows(const AttentionMask& mask) {
    const int n = mask.size();
    for (int p = 0; p < n; ++p) {
        const std::uint8_t* row = mask.row(p);
        bool any = false;
        for (int q = 0; q < n && !any; ++q) any = row[q] != 0;
        if (!any) {
            throw ContractViolation("attention row " + std::to_string(p) + " blocks every position");
        }
    }
}

} // namespace

void masked_attention_probs(const Mat& q, const Mat& k, const AttentionMask& mask, Mat& probs) {
    const int n = mask.size();
    require_shapes(q, k, n);
    require_no_blocked_rows(mask);
    const int d = q.cols;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    if (probs.rows != n || probs.cols != n) probs = Mat(n, n);

#pragma omp parallel for schedule(static) if (n >= 48)
    for (int p = 0; p < n; ++p) {
        const std::uint8_t* allow = mask.row(p);
        double* row = probs[p];
        double mx = -1e308;
        for (int c = 0; c < n; ++c) {
            const double s = dot(q[p], k[c], d) * scale;
            row[c] = s;
            if (allow[c] && s > mx) mx = s;
        }
        double sum = 0.0;
        for (int c = 0; c < n; ++c) {
            if (allow[c]) {
                const double e = std::exp(row[c] - mx);
                row[c] = e;
                sum += e;
            } else {
                row[c] = 0.0;
            }
        }
        const double inv = 1.0 / sum;
        for (int c = 0; c < n; ++c) {
            if (allow[c]) row[c] *= inv;
        }
    }
}

Mat masked_attention(const Mat& q, const Mat& k, const Mat& v, const AttentionMask& mask) {
    const int n = mask.size();
    require_shapes(q, k, n);
    require_no_blocked_rows(mask);
    if (v.rows != n) {
        throw ConfigError("V row count does not match mask size");
    }
    const int d = q.cols;
    const int dv = v.cols;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    Mat out(n, dv);

#pragma omp parallel for schedule(static) if (n >= 48)
    for (int p = 0; p < n; ++p) {
        const std::uint8_t* allow = mask.row(p);
        std::vector<double> scores(static_cast<std::size_t>(n));
        double mx = -1e308;
        for (int c = 0; c < n; ++c) {
            scores[static_cast<std::size_t>(c)] = dot(q[p], k[c], d) * scale;
            if (allow[c] && scores[static_cast<std::size_t>(c)] > mx) mx = scores[static_cast<std::size_t>(c)];
        }
        double sum = 0.0;
        for (int c = 0; c < n; ++c) {
            if (allow[c]) {
                scores[static_cast<std::size_t>(c)] = std::exp(scores[static_cast<std::size_t>(c)] - mx);
                sum += scores[static_cast<std::size_t>(c)];
            } else {
                scores[static_cast<std::size_t>(c)] = 0.0;
            }
        }
        const double inv = 1.0 / sum;
        double* orow = out[p];
        for (int c = 0; c < n; ++c) {
            const double w = scores[static_cast<std::size_t>(c)] * inv;
            const double* vrow = v[c];
            for (int t = 0; t < dv; ++t) orow[t] += w * vrow[t];
        }
    }
    return out;
}

MaskCsr MaskCsr::build(const AttentionMask& mask) {
    const int n = mask.size();
    MaskCsr csr;
    csr.rowptr.resize(static_cast<std::size_t>(n) + 1, 0);
    for (int p = 0; p < n; ++p) {
        const std::uint8_t* row = mask.row(p);
        for (int c = 0; c < n; ++c) {
            if (row[c]) csr.cols.push_back(c);
        }
        csr.rowptr[static_cast<std::size_t>(p) + 1] = csr.cols.size();
    }
    return csr;
}

Mat masked_attention_sparse(const Mat& q, const Mat& k, const Mat& v, const MaskCsr& csr) {
    const int n = static_cast<int>(csr.rowptr.size()) - 1;
    require_shapes(q, k, n);
    if (v.rows != n) {
        throw ConfigError("V row count does not match mask size");
    }
    for (int p = 0; p < n; ++p) {
        if (csr.rowptr[static_cast<std::size_t>(p)] == csr.rowptr[static_cast<std::size_t>(p) + 1]) {
            throw ContractViolation("attention row " + std::to_string(p) + " blocks every position");
        }
    }
    const int d = q.cols;
    const int dv = v.cols;
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    Mat out(n, dv);

#pragma omp parallel for schedule(static) if (n >= 48)
    for (int p = 0; p < n; ++p) {
        const std::size_t begin = csr.rowptr[static_cast<std::size_t>(p)];
        const std::size_t end = csr.rowptr[static_cast<std::size_t>(p) + 1];
        std::vector<double> scores(end - begin);
        double mx = -1e308;
        for (std::size_t t = begin; t < end; ++t) {
            const double s = dot(q[p], k[csr.cols[t]], d) * scale;
            scores[t - begin] = s;
            if (s > mx) mx = s;
        }
        double sum = 0.0;
        for (std::size_t t = begin; t < end; ++t) {
            scores[t - begin] = std::exp(scores[t - begin] - mx);
            sum += scores[t - begin];
        }
        const double inv = 1.0 / sum;
        double* orow = out[p];
        for (std::size_t t = begin; t < end; ++t) {
            const double w = scores[t - begin] * inv;
            const double* vrow = v[csr.cols[t]];
            for (int c = 0; c < dv; ++c) orow[c] += w * vrow[c];
        }
    }
    return out;
}

// --- small matrix helpers -------------------------------------------------

void matmul(CMatRef a, CMatRef b, MatRef c) {
    std::memset(c.data, 0, sizeof(double) * static_cast<std::size_t>(c.rows) * c.cols);
    matmul_acc(a, b, c);
}

void matmul_acc(CMatRef a, CMatRef b, MatRef c) {
    // (r x k) * (k x m) += (r x m); k-major inner loop keeps B accesses contiguous
    for (int r = 0; r < a.rows; ++r) {
        const double* arow = a[r];
        double* crow = c[r];
        for (int t = 0; t < a.cols; ++t) {
            const double av = arow[t];
            if (av == 0.0) continue;
            const double* brow = b[t];
            for (int m = 0; m < b.cols; ++m) crow[m] += av * brow[m];
        }
    }
}

void matmul_tn_acc(CMatRef a, CMatRef b, MatRef c) {
    // (k x r)^T * (k x m) += (r x m)
    for (int t = 0; t < a.rows; ++t) {
        const double* arow = a[t];
        const double* brow = b[t];
        for (int r = 0; r < a.cols; ++r) {
            const double av = arow[r];
            if (av == 0.0) continue;
            double* crow = c[r];
            for (int m = 0; m < b.cols; ++m) crow[m] += av * brow[m];
        }
    }
}

void matmul_nt(CMatRef a, CMatRef b, MatRef c) {
    // (r x k) * (m x k)^T = (r x m)
    for (int r = 0; r < a.rows; ++r) {
        const double* arow = a[r];
        double* crow = c[r];
        for (int m = 0; m < b.rows; ++m) {
            crow[m] = dot(arow, b[m], a.cols);
        }
    }
}

void add_inplace(MatRef a, CMatRef b) {
    const std::size_t count = static_cast<std::size_t>(a.rows) * a.cols;
    for (std::size_t i = 0; i < count; ++i) a.data[i] += b.data[i];
}

} // namespace slim
