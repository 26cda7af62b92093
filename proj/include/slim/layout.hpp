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

#include <filesystem>
#include <vector>

namespace slim {

/// Half-open index range [begin, end).
struct Span {
    int begin = 0;
    int end = 0;

    int size() const { return end - begin; }
    bool contains(int p) const { return p >= begin && p < end; }

    friend bool operator==(const Span&, const Span&) = default;
};

/// Segment sizes of one multi-modal token sequence. The segment order is
/// fixed: system, objects, instruction, response. Each object contributes a
/// contiguous block of tokens_per_object tokens.
class TokenLayout {
public:
    TokenLayout() = default;

    /// Throws ConfigError on negative counts or tokens_per_object < 1.
    TokenLayout(int n_system, int n_objects, int tokens_per_object, int n_instruction, int n_response);

    int n_system() const { return n_system_; }
    int n_objects() const { return n_objects_; }
    int tokens_per_object() const { return tokens_per_object_; }
    int n_instruction() const { return n_instruction_; }
    int n_response() const { return n_response_; }

    int n_object_tokens() const { return n_objects_ * tokens_per_object_; }
    int total() const { return n_system_ + n_object_tokens() + n_instruction_ + n_response_; }

    /// Object index owning token position p, or -1 when p is outside the
    /// object segment.
    int object_of(int p) const;

    friend bool operator==(const TokenLayout&, const TokenLayout&) = default;

private:
    int n_system_ = 0;
    int n_objects_ = 0;
    int tokens_per_object_ = 1;
    int n_instruction_ = 0;
    int n_response_ = 0;
};

struct SegmentSpans {
    Span system;
    std::vector<Span> objects; // one span per object, each tokens_per_object wide
    Span object_tokens;        // union of the per-object spans
    Span instruction;
    Span response;
    int total = 0;
};

/// Splits [0, n) into the fixed segment order. The returned spans partition
/// the sequence with no overlap and no gap.
SegmentSpans segment_spans(const TokenLayout& layout);

/// Reads a SLIMLAYOUT v1 file.
TokenLayout load_layout(const std::filesystem::path& path);

void save_layout(const TokenLayout& layout, const std::filesystem::path& path);

} // namespace slim
