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

#include <cstdint>
#include <vector>

namespace slim {

/// Square boolean matrix, one byte per cell (bit-packing is not worth the
/// access cost at the sizes used here).
struct BoolMat {
    int n = 0;
    std::vector<std::uint8_t> cells;

    BoolMat() = default;
    explicit BoolMat(int size, bool value = false)
        : n(size), cells(static_cast<std::size_t>(size) * size, value ? 1 : 0) {}

    bool get(int i, int j) const { return cells[static_cast<std::size_t>(i) * n + j] != 0; }
    void set(int i, int j, bool v) { cells[static_cast<std::size_t>(i) * n + j] = v ? 1 : 0; }

    const std::uint8_t* row(int i) const { return cells.data() + static_cast<std::size_t>(i) * n; }
    std::uint8_t* row(int i) { return cells.data() + static_cast<std::size_t>(i) * n; }

    long long popcount() const {
        long long c = 0;
        for (std::uint8_t v : cells) c += v;
        return c;
    }

    friend bool operator==(const BoolMat&, const BoolMat&) = default;
};

} // namespace slim
