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

#include "slim/mask.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "slim/error.hpp"

namespace slim {

MaskStrategy MaskStrategy::parse(std::string_view spec) {
    MaskStrategy s;
    std::string base(spec);
    const std::string suffix = "+inst";
    if (base.size() >= suffix.size() && base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
        s.inst = true;
        base.resize(base.size() - suffix.size());
    }
    if (base == "causal") {
        s.kind = MaskKind::Causal;
    } else if (base == "fullall") {
        s.kind = MaskKind::FullAll;
    } else if (base == "full") {
        s.kind = MaskKind::FullObjectBlock;
    } else if (base == "diag") {
        s.kind = MaskKind::DiagonalObjectBlock;
    } else if (base.rfind("fixedn:", 0) == 0) {
        s.kind = MaskKind::FixedN;
        try {
            std::size_t pos = 0;
            const std::string arg = base.substr(7);
            s.n_fixed = std::stoi(arg, &pos);
            if (pos != arg.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError("cannot parse fixedn count in strategy '" + std::string(spec) + "'");
        }
        if (s.n_fixed < 1) {
            throw ConfigError("fixedn count must be positive");
        }
    } else if (base == "geo") {
        s.kind = MaskKind::Geo;
    } else {
        throw ConfigError("unknown mask strategy '" + std::string(spec) +
                          "' (expected causal|fullall|full|diag|fixedn:<k>|geo with optional +inst)");
    }
    return s;
}

std::string MaskStrategy::str() const {
    std::string base;
    switch (kind) {
        case MaskKind::Causal: base = "causal"; break;
        case MaskKind::FullAll: base = "fullall"; break;
        case MaskKind::FullObjectBlock: base = "full"; break;
        case MaskKind::DiagonalObjectBlock: base = "diag"; break;
        case MaskKind::FixedN: base = "fixedn:" + std::to_string(n_fixed); break;
        case MaskKind::Geo: base = "geo"; break;
    }
    return inst ? base + "+inst" : base;
}

AttentionMask::AttentionMask(TokenLayout layout, BoolMat allow) : layout_(layout), allow_(std::move(allow)) {
    if (allow_.n != layout_.total()) {
        throw ConfigError("mask size " + std::to_string(allow_.n) + " does not match layout length " +
                          std::to_string(layout_.total()));
    }
}

AttentionMask causal_mask(const TokenLayout& layout) {
    const int n = layout.total();
    BoolMat allow(n, false);
    for (int p = 0; p < n; ++p) {
        std::uint8_t* row = allow.row(p);
        std::fill(row, row + p + 1, std::uint8_t{1});
    }
    return AttentionMask(layout, std::move(allow));
}

AttentionMask causal_mask(int n) {
    return causal_mask(TokenLayout(n, 0, 1, 0, 0));
}

namespace {

// Per-object-pair allow decision for the block strategies; broadcast over the
// token blocks by the caller. Never called for Causal or FullAll.
BoolMat object_pair_decisions(const SceneObjects& scene, const MaskStrategy& strategy) {
    const int n = scene.size();
    switch (strategy.kind) {
        case MaskKind::FullObjectBlock:
            return BoolMat(n, true);
        case MaskKind::DiagonalObjectBlock: {
            BoolMat m(n, false);
            for (int i = 0; i < n; ++i) m.set(i, i, true);
            return m;
        }
        case MaskKind::FixedN: {
            const Mat d = pairwise_distances(scene);
            const std::vector<int> k(static_cast<std::size_t>(n), std::min(strategy.n_fixed, n - 1));
            return geo_object_mask(topk_neighbors(d, k), n);
        }
        case MaskKind::Geo: {
            const DensityProfile profile = density_profile(scene, strategy.geo);
            return geo_object_mask(profile.neighbors, n);
        }
        default:
            throw ConfigError("internal: strategy has no object-pair rule");
    }
}

} // namespace

AttentionMask compose(const SceneObjects& scene, const TokenLayout& layout, const MaskStrategy& strategy) {
    if (strategy.kind == MaskKind::Geo) validate(strategy.geo);
    if (strategy.kind == MaskKind::FixedN && strategy.n_fixed < 1) {
        throw ConfigError("fixedn count must be positive");
    }
    if (layout.n_objects() > 0 && layout.n_objects() != scene.size()) {
        throw ConfigError("layout expects " + std::to_string(layout.n_objects()) + " objects but scene has " +
                          std::to_string(scene.size()));
    }

    AttentionMask mask = causal_mask(layout);
    const int n = layout.total();
    if (strategy.kind == MaskKind::FullAll) {
        BoolMat all(n, true);
        return AttentionMask(layout, std::move(all));
    }

    const SegmentSpans spans = segment_spans(layout);
    const int n_obj = layout.n_objects();

    if (n_obj > 0 && strategy.kind != MaskKind::Causal) {
        const BoolMat decide = object_pair_decisions(scene, strategy);
        for (int i = 0; i < n_obj; ++i) {
            const Span pi = spans.objects[static_cast<std::size_t>(i)];
            for (int j = 0; j < n_obj; ++j) {
                const bool v = decide.get(i, j);
                const Span pj = spans.objects[static_cast<std::size_t>(j)];
                for (int p = pi.begin; p < pi.end; ++p) {
                    for (int q = pj.begin; q < pj.end; ++q) {
                        mask.set_allow(p, q, v);
                    }
                }
            }
        }
    }

    if (strategy.inst) {
        for (int p = spans.object_tokens.begin; p < spans.object_tokens.end; ++p) {
            for (int q = spans.instruction.begin; q < spans.instruction.end; ++q) {
                mask.set_allow(p, q, true);
            }
        }
    }

    return mask;
}

namespace {

Segment segment_of(const SegmentSpans& spans, int p) {
    if (spans.system.contains(p)) return Segment::System;
    if (spans.object_tokens.contains(p)) return Segment::Objects;
    if (spans.instruction.contains(p)) return Segment::Instruction;
    return Segment::Response;
}

} // namespace

SparsityReport sparsity_stats(const AttentionMask& mask) {
    SparsityReport report;
    const int n = mask.size();
    report.n = n;
    const TokenLayout& layout = mask.layout();
    const SegmentSpans spans = segment_spans(layout);

    std::vector<int> seg(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) seg[static_cast<std::size_t>(p)] = static_cast<int>(segment_of(spans, p));

    for (int p = 0; p < n; ++p) {
        const std::uint8_t* row = mask.row(p);
        for (int q = 0; q < n; ++q) {
            const int rs = seg[static_cast<std::size_t>(p)];
            const int cs = seg[static_cast<std::size_t>(q)];
            report.block_cells[rs][cs] += 1;
            if (row[q]) {
                report.block_allowed[rs][cs] += 1;
                report.total_allowed += 1;
            }
        }
    }

    const int n_obj = layout.n_objects();
    if (n_obj > 0) {
        report.has_object_block = true;
        const int obj_idx = static_cast<int>(Segment::Objects);
        report.object_block_density = static_cast<double>(report.block_allowed[obj_idx][obj_idx]) /
                                      static_cast<double>(report.block_cells[obj_idx][obj_idx]);
        report.object_out_degree.assign(static_cast<std::size_t>(n_obj), 0);
        for (int i = 0; i < n_obj; ++i) {
            const Span pi = spans.objects[static_cast<std::size_t>(i)];
            int degree = 0;
            for (int j = 0; j < n_obj; ++j) {
                if (j == i) continue;
                const Span pj = spans.objects[static_cast<std::size_t>(j)];
                bool any = false;
                for (int p = pi.begin; p < pi.end && !any; ++p) {
                    for (int q = pj.begin; q < pj.end && !any; ++q) {
                        any = mask.allow(p, q);
                    }
                }
                if (any) ++degree;
            }
            report.object_out_degree[static_cast<std::size_t>(i)] = degree;
        }
    }
    return report;
}

std::string format_sparsity(const SparsityReport& report) {
    std::ostringstream os;
    const long long total_cells = static_cast<long long>(report.n) * report.n;
    os << "n=" << report.n << " allowed=" << report.total_allowed << "/" << total_cells;
    if (report.has_object_block) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", report.object_block_density);
        os << " object_block_density=" << buf;
        // histogram of out-degrees (k_i for the Geo strategy)
        std::map<int, int> hist;
        for (int deg : report.object_out_degree) hist[deg] += 1;
        os << " degree_hist=";
        bool first = true;
        for (const auto& [deg, count] : hist) {
            if (!first) os << ',';
            os << deg << 'x' << count;
            first = false;
        }
    }
    return os.str();
}

void save_mask(const AttentionMask& mask, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot open '" + path.string() + "' for writing");
    }
    const int n = mask.size();
    out << "SLIMMASK v1 " << n << ' ' << n << "\n";
    std::string line(static_cast<std::size_t>(n), '0');
    for (int p = 0; p < n; ++p) {
        const std::uint8_t* row = mask.row(p);
        for (int q = 0; q < n; ++q) line[static_cast<std::size_t>(q)] = row[q] ? '1' : '0';
        out << line << "\n";
    }
    if (!out) {
        throw ParseError("write failed for '" + path.string() + "'");
    }
}

BoolMat load_mask_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open mask file '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path.string() + ":1: missing SLIMMASK header");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream header(line);
    std::string magic, version;
    int rows = 0, cols = 0;
    if (!(header >> magic >> version >> rows >> cols) || magic != "SLIMMASK" || version != "v1" || rows < 1 ||
        cols != rows) {
        throw ParseError(path.string() + ":1: expected 'SLIMMASK v1 <rows> <cols>' with square shape");
    }
    BoolMat m(rows, false);
    for (int p = 0; p < rows; ++p) {
        if (!std::getline(in, line)) {
            throw ParseError(path.string() + ": expected " + std::to_string(rows) + " mask rows, found " +
                             std::to_string(p));
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (static_cast<int>(line.size()) != cols) {
            throw ParseError(path.string() + ":" + std::to_string(p + 2) + ": row has " +
                             std::to_string(line.size()) + " cells, expected " + std::to_string(cols));
        }
        for (int q = 0; q < cols; ++q) {
            const char c = line[static_cast<std::size_t>(q)];
            if (c != '0' && c != '1') {
                throw ParseError(path.string() + ":" + std::to_string(p + 2) + ": invalid cell '" +
                                 std::string(1, c) + "'");
            }
            m.set(p, q, c == '1');
        }
    }
    return m;
}

AttentionMask attach_layout(BoolMat allow, TokenLayout layout) {
    return AttentionMask(layout, std::move(allow));
}

} // namespace slim
