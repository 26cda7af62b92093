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

#include <cstddef>
#include <vector>

namespace slim {

/// Dense row-major double matrix. Inner products always accumulate in
/// ascending index order so results do not depend on the thread count.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double* operator[](int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const double* operator[](int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    void fill(double v) { data.assign(data.size(), v); }

    friend bool operator==(const Mat&, const Mat&) = default;
};

/// Non-owning view over row-major storage; lets decoder parameters live in one
/// flat vector while the math below stays matrix-shaped.
struct MatRef {
    double* data = nullptr;
    int rows = 0;
    int cols = 0;

    MatRef() = default;
    MatRef(double* d, int r, int c) : data(d), rows(r), cols(c) {}
    MatRef(Mat& m) : data(m.data.data()), rows(m.rows), cols(m.cols) {}

    double* operator[](int r) const { return data + static_cast<std::size_t>(r) * cols; }
};

struct CMatRef {
    const double* data = nullptr;
    int rows = 0;
    int cols = 0;

    CMatRef() = default;
    CMatRef(const double* d, int r, int c) : data(d), rows(r), cols(c) {}
    CMatRef(const Mat& m) : data(m.data.data()), rows(m.rows), cols(m.cols) {}
    CMatRef(const MatRef& m) : data(m.data), rows(m.rows), cols(m.cols) {}

    const double* operator[](int r) const { return data + static_cast<std::size_t>(r) * cols; }
};

/// C = A * B
void matmul(CMatRef a, CMatRef b, MatRef c);
/// C += A * B
void matmul_acc(CMatRef a, CMatRef b, MatRef c);
/// C += A^T * B
void matmul_tn_acc(CMatRef a, CMatRef b, MatRef c);
/// C = A * B^T
void matmul_nt(CMatRef a, CMatRef b, MatRef c);

void add_inplace(MatRef a, CMatRef b);

} // namespace slim
