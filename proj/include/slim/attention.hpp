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

#include "slim/mask.hpp"
#include "slim/mat.hpp"

namespace slim {

/// Row-stochastic attention weights: softmax(Q K^T / sqrt(d)) restricted to
/// the allowed entries of each row. Blocked entries are exactly 0 (they are
/// excluded from the softmax rather than pushed to -inf). Throws
/// ContractViolation if any row is fully blocked. Row-parallel, and
/// bit-identical for any thread count.
void masked_attention_probs(const Mat& q, const Mat& k, const AttentionMask& mask, Mat& probs);

/// Dense path: scores for every (row, column) pair, softmax over the allowed
/// set, output accumulated over the full row. Reference cost of unmasked
/// attention over the same sequence.
Mat masked_attention(const Mat& q, const Mat& k, const Mat& v, const AttentionMask& mask);

/// Per-row allowed-column lists in CSR form, columns ascending.
struct MaskCsr {
    std::vector<int> cols;
    std::vector<std::size_t> rowptr;

    static MaskCsr build(const AttentionMask& mask);
    std::size_t nnz() const { return cols.size(); }
};

/// Sparse-gather path: scores and output only touch allowed columns. Agrees
/// with the dense path bit for bit (same accumulation order).
Mat masked_attention_sparse(const Mat& q, const Mat& k, const Mat& v, const MaskCsr& csr);

} // namespace slim
