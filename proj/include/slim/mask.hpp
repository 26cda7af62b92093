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

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "slim/boolmat.hpp"
#include "slim/geo.hpp"
#include "slim/layout.hpp"
#include "slim/scene.hpp"

namespace slim {

/// How the object-object block of the attention mask is filled. All variants
/// except FullAll leave everything outside the object-object block causal
/// (plus the optional object-to-instruction override).
enum class MaskKind {
    Causal,              // object block untouched, plain lower-triangular
    FullAll,             // every entry of the whole mask allowed
    FullObjectBlock,     // all-to-all inside the object block
    DiagonalObjectBlock, // objects attend only to their own token block
    FixedN,              // each object attends to a fixed number of nearest objects
    Geo,                 // density-adaptive nearest neighbors
};

struct MaskStrategy {
    MaskKind kind = MaskKind::Causal;
    bool inst = false; // object tokens may attend to all instruction tokens
    int n_fixed = 5;   // FixedN only; clamped to N - 1 at compose time
    GeoParams geo;     // Geo only

    /// Parses the mini-grammar
    ///   causal | fullall | full | diag | fixedn:<k> | geo   [+inst]
    /// e.g. "geo+inst", "fixedn:5". Throws ConfigError on anything else.
    static MaskStrategy parse(std::string_view spec);

    std::string str() const;

    friend bool operator==(const MaskStrategy&, const MaskStrategy&) = default;
};

/// Boolean allow matrix over a full token sequence. allow = true corresponds
/// to additive mask 0, allow = false to -inf; the additive form is never
/// materialized (softmax works by exclusion instead).
class AttentionMask {
public:
    AttentionMask() = default;
    AttentionMask(TokenLayout layout, BoolMat allow);

    int size() const { return allow_.n; }
    const TokenLayout& layout() const { return layout_; }
    const BoolMat& matrix() const { return allow_; }

    bool allow(int p, int q) const { return allow_.get(p, q); }
    void set_allow(int p, int q, bool v) { allow_.set(p, q, v); }
    const std::uint8_t* row(int p) const { return allow_.row(p); }

    friend bool operator==(const AttentionMask&, const AttentionMask&) = default;

private:
    TokenLayout layout_;
    BoolMat allow_;
};

/// Plain lower-triangular mask over a layout.
AttentionMask causal_mask(const TokenLayout& layout);

/// Convenience for sequences with no segment structure.
AttentionMask causal_mask(int n);

/// Builds the full-sequence mask: causal base, object-object block per
/// strategy (decisions made per object pair and broadcast over token blocks;
/// tokens of one object always fully attend to each other under the
/// non-causal block strategies), then the object-to-instruction override when
/// strategy.inst is set. Response rows stay purely causal. Throws ConfigError
/// when the scene and layout disagree on the number of objects.
AttentionMask compose(const SceneObjects& scene, const TokenLayout& layout, const MaskStrategy& strategy);

enum class Segment : int { System = 0, Objects = 1, Instruction = 2, Response = 3 };

struct SparsityReport {
    int n = 0;
    long long total_allowed = 0;
    // Allowed counts and cell counts for each (row segment, column segment) pair.
    std::array<std::array<long long, 4>, 4> block_allowed{};
    std::array<std::array<long long, 4>, 4> block_cells{};
    // Object block statistics; meaningful only when the layout has objects.
    bool has_object_block = false;
    double object_block_density = 0.0;
    // Per object: number of other objects it attends to anywhere in their
    // token blocks. Equals k_i for the Geo strategy.
    std::vector<int> object_out_degree;
};

SparsityReport sparsity_stats(const AttentionMask& mask);

/// One-line human-readable summary (used by the CLI).
std::string format_sparsity(const SparsityReport& report);

/// SLIMMASK v1 writer. Bit-exact across platforms.
void save_mask(const AttentionMask& mask, const std::filesystem::path& path);

/// SLIMMASK v1 reader. The file stores only the matrix; see attach_layout.
BoolMat load_mask_matrix(const std::filesystem::path& path);

/// Re-associates a loaded matrix with its layout. Throws ConfigError on a
/// size mismatch.
AttentionMask attach_layout(BoolMat allow, TokenLayout layout);

} // namespace slim
