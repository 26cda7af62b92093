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

#include "slim/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "slim/attention.hpp"
#include "slim/error.hpp"
#include "slim/rng.hpp"

namespace slim {

void DecoderConfig::validate() const {
    if (n_layers < 1 || n_heads < 1 || d_model < 1 || d_head < 1 || d_ff < 1 || vocab_size < 2 ||
        max_positions < 1) {
        throw ConfigError("decoder dimensions must be positive (vocab >= 2)");
    }
    if (n_layers > 2 || n_heads > 4 || d_model > 64 || vocab_size > 512) {
        throw ConfigError("decoder exceeds the pinned toy scale (<=2 layers, <=4 heads, d_model<=64, vocab<=512)");
    }
}

struct ParamLayoutBuilder {
    DecoderParams& p;
    std::size_t cursor = 0;

    std::size_t add(std::string name, int rows, int cols) {
        ParamView v;
        v.name = std::move(name);
        v.offset = cursor;
        v.rows = rows;
        v.cols = cols;
        cursor += static_cast<std::size_t>(rows) * cols;
        p.views_.push_back(std::move(v));
        return p.views_.size() - 1;
    }
};

DecoderParams::DecoderParams(DecoderConfig config) : config_(config) {
    config_.validate();
    ParamLayoutBuilder b{*this};
    embedding_ = b.add("embedding", config_.vocab_size, config_.d_model);
    positions_ = b.add("positions", config_.max_positions, config_.d_model);
    for (int l = 0; l < config_.n_layers; ++l) {
        const std::string lp = "layer" + std::to_string(l) + ".";
        for (int h = 0; h < config_.n_heads; ++h) {
            const std::string hp = lp + "head" + std::to_string(h) + ".";
            wq_.push_back(b.add(hp + "wq", config_.d_model, config_.d_head));
            wk_.push_back(b.add(hp + "wk", config_.d_model, config_.d_head));
            wv_.push_back(b.add(hp + "wv", config_.d_model, config_.d_head));
        }
        wo_.push_back(b.add(lp + "wo", config_.n_heads * config_.d_head, config_.d_model));
        w1_.push_back(b.add(lp + "w1", config_.d_model, config_.d_ff));
        w2_.push_back(b.add(lp + "w2", config_.d_ff, config_.d_model));
    }
    out_ = b.add("out", config_.d_model, config_.vocab_size);
    flat_.assign(b.cursor, 0.0);
}

DecoderParams DecoderParams::random(const DecoderConfig& config, std::uint64_t seed) {
    DecoderParams p(config);
    Rng rng(seed);
    for (const ParamView& v : p.views_) {
        if (v.name == "embedding") {
            // near-orthogonal token embeddings (identity rows plus noise);
            // keeps token identities linearly separable from step zero
            for (int r = 0; r < v.rows; ++r) {
                for (int c = 0; c < v.cols; ++c) {
                    double value = 0.02 * rng.normal();
                    if (r % v.cols == c) value += 1.0;
                    p.flat_[v.offset + static_cast<std::size_t>(r) * v.cols + c] = value;
                }
            }
            continue;
        }
        if (v.name == "positions") {
            // small so position information does not swamp token identity
            for (std::size_t i = 0; i < static_cast<std::size_t>(v.rows) * v.cols; ++i) {
                p.flat_[v.offset + i] = 0.1 * rng.normal();
            }
            continue;
        }
        // fan-in scaling keeps activations O(1) without normalization layers;
        // attention projections start hotter so query/key alignment has a
        // usable seed for gradient descent to amplify
        const bool attn = v.name.size() >= 2 && v.name.compare(v.name.size() - 2, 2, "wq") == 0;
        const bool attn_k = v.name.size() >= 2 && v.name.compare(v.name.size() - 2, 2, "wk") == 0;
        const double scale = (attn || attn_k ? 1.4 : 0.7) / std::sqrt(static_cast<double>(v.rows));
        for (std::size_t i = 0; i < static_cast<std::size_t>(v.rows) * v.cols; ++i) {
            p.flat_[v.offset + i] = scale * rng.normal();
        }
    }
    return p;
}

std::string DecoderParams::coord_name(std::size_t flat_index) const {
    for (const ParamView& v : views_) {
        const std::size_t count = static_cast<std::size_t>(v.rows) * v.cols;
        if (flat_index >= v.offset && flat_index < v.offset + count) {
            const std::size_t rel = flat_index - v.offset;
            const int r = static_cast<int>(rel / v.cols);
            const int c = static_cast<int>(rel % v.cols);
            return v.name + "[" + std::to_string(r) + "," + std::to_string(c) + "]";
        }
    }
    return "param[" + std::to_string(flat_index) + "]";
}

MatRef DecoderParams::view_in(std::span<double> buffer, const ParamView& view) const {
    return MatRef(buffer.data() + view.offset, view.rows, view.cols);
}

void SequenceBatch::validate(const DecoderConfig& config) const {
    const int n = layout.total();
    if (static_cast<int>(tokens.size()) != n) {
        throw ConfigError("token count " + std::to_string(tokens.size()) + " does not match layout length " +
                          std::to_string(n));
    }
    if (mask.size() != n) {
        throw ConfigError("mask size " + std::to_string(mask.size()) + " does not match layout length " +
                          std::to_string(n));
    }
    if (!targets.empty() && static_cast<int>(targets.size()) != n) {
        throw ConfigError("targets must be empty or one per position");
    }
    if (n > 256) {
        throw ConfigError("sequence length " + std::to_string(n) + " exceeds the pinned toy scale (n <= 256)");
    }
    if (n > config.max_positions) {
        throw ConfigError("sequence length exceeds max_positions");
    }
    for (int t : tokens) {
        if (t < 0 || t >= config.vocab_size) {
            throw ConfigError("token id " + std::to_string(t) + " outside vocabulary");
        }
    }
    for (int t : targets) {
        if (t != -1 && (t < 0 || t >= config.vocab_size)) {
            throw ConfigError("target id " + std::to_string(t) + " outside vocabulary");
        }
    }
}

namespace {

// Object tokens optionally share the position id of the first object slot, so
// the object segment carries no order signal through the position table.
int position_id(const DecoderConfig& config, const SegmentSpans& spans, int p) {
    if (config.shared_object_position && spans.object_tokens.contains(p)) {
        return spans.object_tokens.begin;
    }
    return p;
}

} // namespace

Mat decoder_forward(const DecoderParams& params, const SequenceBatch& batch, ForwardTrace* trace) {
    const DecoderConfig& cfg = params.config();
    batch.validate(cfg);
    const int n = batch.layout.total();
    const SegmentSpans spans = segment_spans(batch.layout);

    ForwardTrace local;
    ForwardTrace& tr = trace ? *trace : local;
    const std::size_t lh = static_cast<std::size_t>(cfg.n_layers) * cfg.n_heads;
    tr.x_in.assign(static_cast<std::size_t>(cfg.n_layers), Mat());
    tr.q.assign(lh, Mat());
    tr.k.assign(lh, Mat());
    tr.v.assign(lh, Mat());
    tr.probs.assign(lh, Mat());
    tr.head_out.assign(lh, Mat());
    tr.concat.assign(static_cast<std::size_t>(cfg.n_layers), Mat());
    tr.x_mid.assign(static_cast<std::size_t>(cfg.n_layers), Mat());
    tr.ffn_h.assign(static_cast<std::size_t>(cfg.n_layers), Mat());

    Mat x(n, cfg.d_model);
    CMatRef emb = params.embedding();
    CMatRef pos = params.positions();
    for (int p = 0; p < n; ++p) {
        const double* e = emb[batch.tokens[static_cast<std::size_t>(p)]];
        const double* q = pos[position_id(cfg, spans, p)];
        double* row = x[p];
        for (int c = 0; c < cfg.d_model; ++c) row[c] = e[c] + q[c];
    }

    for (int l = 0; l < cfg.n_layers; ++l) {
        tr.x_in[static_cast<std::size_t>(l)] = x;
        Mat concat(n, cfg.n_heads * cfg.d_head);
        for (int h = 0; h < cfg.n_heads; ++h) {
            const std::size_t slot = static_cast<std::size_t>(l) * cfg.n_heads + h;
            Mat& q = tr.q[slot];
            Mat& k = tr.k[slot];
            Mat& v = tr.v[slot];
            q = Mat(n, cfg.d_head);
            k = Mat(n, cfg.d_head);
            v = Mat(n, cfg.d_head);
            matmul(x, params.wq(l, h), q);
            matmul(x, params.wk(l, h), k);
            matmul(x, params.wv(l, h), v);

            Mat& probs = tr.probs[slot];
            masked_attention_probs(q, k, batch.mask, probs);

            Mat& head = tr.head_out[slot];
            head = Mat(n, cfg.d_head);
            matmul(probs, v, head);
            for (int p = 0; p < n; ++p) {
                double* dst = concat[p] + h * cfg.d_head;
                const double* src = head[p];
                for (int c = 0; c < cfg.d_head; ++c) dst[c] = src[c];
            }
        }
        tr.concat[static_cast<std::size_t>(l)] = concat;

        Mat attn_out(n, cfg.d_model);
        matmul(concat, params.wo(l), attn_out);
        Mat x_mid = x;
        add_inplace(x_mid, attn_out);
        tr.x_mid[static_cast<std::size_t>(l)] = x_mid;

        Mat hidden(n, cfg.d_ff);
        matmul(x_mid, params.w1(l), hidden);
        for (double& value : hidden.data) value = std::tanh(value);
        tr.ffn_h[static_cast<std::size_t>(l)] = hidden;

        Mat ffn_out(n, cfg.d_model);
        matmul(hidden, params.w2(l), ffn_out);
        x = x_mid;
        add_inplace(x, ffn_out);
    }

    tr.x_final = x;
    Mat logits(n, cfg.vocab_size);
    matmul(x, params.out(), logits);
    return logits;
}

double nll_loss(const Mat& logits, const std::vector<int>& targets, Span response_span, bool mean) {
    if (response_span.size() <= 0) {
        throw ContractViolation("response span is empty");
    }
    double total = 0.0;
    int count = 0;
    for (int p = response_span.begin; p < response_span.end; ++p) {
        const int y = targets[static_cast<std::size_t>(p)];
        if (y < 0) continue;
        const double* row = logits[p];
        double mx = row[0];
        for (int c = 1; c < logits.cols; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (int c = 0; c < logits.cols; ++c) sum += std::exp(row[c] - mx);
        total += mx + std::log(sum) - row[y];
        ++count;
    }
    if (count == 0) {
        throw ContractViolation("no targets inside the response span");
    }
    return mean ? total / static_cast<double>(count) : total;
}

Mat nll_loss_grad(const Mat& logits, const std::vector<int>& targets, Span response_span, bool mean) {
    if (response_span.size() <= 0) {
        throw ContractViolation("response span is empty");
    }
    int count = 0;
    for (int p = response_span.begin; p < response_span.end; ++p) {
        if (targets[static_cast<std::size_t>(p)] >= 0) ++count;
    }
    if (count == 0) {
        throw ContractViolation("no targets inside the response span");
    }
    const double w = mean ? 1.0 / static_cast<double>(count) : 1.0;

    Mat grad(logits.rows, logits.cols);
    for (int p = response_span.begin; p < response_span.end; ++p) {
        const int y = targets[static_cast<std::size_t>(p)];
        if (y < 0) continue;
        const double* row = logits[p];
        double* grow = grad[p];
        double mx = row[0];
        for (int c = 1; c < logits.cols; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (int c = 0; c < logits.cols; ++c) sum += std::exp(row[c] - mx);
        const double inv = 1.0 / sum;
        for (int c = 0; c < logits.cols; ++c) {
            grow[c] = std::exp(row[c] - mx) * inv * w;
        }
        grow[y] -= w;
    }
    return grad;
}

void decoder_backward(const DecoderParams& params, const SequenceBatch& batch, const ForwardTrace& trace,
                      const Mat& dlogits, std::span<double> grad) {
    const DecoderConfig& cfg = params.config();
    const int n = batch.layout.total();
    const SegmentSpans spans = segment_spans(batch.layout);

    // Gradient views share the parameter layout.
    const auto& views = params.views();
    auto find = [&](const std::string& name) -> MatRef {
        for (const ParamView& v : views) {
            if (v.name == name) return MatRef(grad.data() + v.offset, v.rows, v.cols);
        }
        throw ConfigError("internal: unknown parameter view " + name);
    };

    MatRef g_emb = find("embedding");
    MatRef g_pos = find("positions");
    MatRef g_out = find("out");

    // logits = X_final * W_out
    Mat dx(n, cfg.d_model);
    matmul_tn_acc(trace.x_final, dlogits, g_out);
    matmul_nt(dlogits, params.out(), dx);

    Mat ds(n, n);
    for (int l = cfg.n_layers - 1; l >= 0; --l) {
        const std::string lp = "layer" + std::to_string(l) + ".";
        const Mat& x_mid = trace.x_mid[static_cast<std::size_t>(l)];
        const Mat& hidden = trace.ffn_h[static_cast<std::size_t>(l)];

        // FFN: x_out = x_mid + tanh(x_mid W1) W2
        Mat dhidden(n, cfg.d_ff);
        matmul_tn_acc(hidden, dx, find(lp + "w2"));
        matmul_nt(dx, params.w2(l), dhidden);
        for (std::size_t i = 0; i < dhidden.data.size(); ++i) {
            const double h = hidden.data[i];
            dhidden.data[i] *= (1.0 - h * h);
        }
        Mat dx_mid = dx; // residual branch
        matmul_tn_acc(x_mid, dhidden, find(lp + "w1"));
        {
            Mat tmp(n, cfg.d_model);
            matmul_nt(dhidden, params.w1(l), tmp);
            add_inplace(dx_mid, tmp);
        }

        // Attention: x_mid = x_in + concat(heads) W_o
        const Mat& x_in = trace.x_in[static_cast<std::size_t>(l)];
        const Mat& concat = trace.concat[static_cast<std::size_t>(l)];
        Mat dconcat(n, cfg.n_heads * cfg.d_head);
        matmul_tn_acc(concat, dx_mid, find(lp + "wo"));
        matmul_nt(dx_mid, params.wo(l), dconcat);

        Mat dx_in = dx_mid; // residual branch
        for (int h = 0; h < cfg.n_heads; ++h) {
            const std::size_t slot = static_cast<std::size_t>(l) * cfg.n_heads + h;
            const std::string hp = lp + "head" + std::to_string(h) + ".";
            const Mat& q = trace.q[slot];
            const Mat& k = trace.k[slot];
            const Mat& v = trace.v[slot];
            const Mat& probs = trace.probs[slot];

            Mat dhead(n, cfg.d_head);
            for (int p = 0; p < n; ++p) {
                const double* src = dconcat[p] + h * cfg.d_head;
                double* dst = dhead[p];
                for (int c = 0; c < cfg.d_head; ++c) dst[c] = src[c];
            }

            // head = probs * V
            Mat dprobs(n, n);
            matmul_nt(dhead, v, dprobs);
            Mat dv(n, cfg.d_head);
            matmul_tn_acc(probs, dhead, dv);

            // softmax backward per row over the allowed support; blocked
            // entries have probs exactly 0 so they contribute nothing.
            const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_head));
            if (ds.rows != n || ds.cols != n) ds = Mat(n, n);
            for (int p = 0; p < n; ++p) {
                const double* arow = probs[p];
                const double* grow = dprobs[p];
                double inner = 0.0;
                for (int c = 0; c < n; ++c) inner += arow[c] * grow[c];
                double* srow = ds[p];
                for (int c = 0; c < n; ++c) {
                    srow[c] = arow[c] * (grow[c] - inner) * scale;
                }
            }

            // S = Q K^T * scale
            Mat dq(n, cfg.d_head);
            matmul(ds, k, dq);
            Mat dk(n, cfg.d_head);
            matmul_tn_acc(ds, q, dk);

            // projections
            matmul_tn_acc(x_in, dq, find(hp + "wq"));
            matmul_tn_acc(x_in, dk, find(hp + "wk"));
            matmul_tn_acc(x_in, dv, find(hp + "wv"));
            Mat tmp(n, cfg.d_model);
            matmul_nt(dq, params.wq(l, h), tmp);
            add_inplace(dx_in, tmp);
            matmul_nt(dk, params.wk(l, h), tmp);
            add_inplace(dx_in, tmp);
            matmul_nt(dv, params.wv(l, h), tmp);
            add_inplace(dx_in, tmp);
        }
        dx = dx_in;
    }

    // embeddings
    for (int p = 0; p < n; ++p) {
        const double* row = dx[p];
        double* erow = g_emb[batch.tokens[static_cast<std::size_t>(p)]];
        double* prow = g_pos[position_id(cfg, spans, p)];
        for (int c = 0; c < cfg.d_model; ++c) {
            erow[c] += row[c];
            prow[c] += row[c];
        }
    }
}

double loss_and_grad(const DecoderParams& params, const SequenceBatch& batch, std::span<double> grad) {
    ForwardTrace trace;
    const Mat logits = decoder_forward(params, batch, &trace);
    const SegmentSpans spans = segment_spans(batch.layout);
    const bool mean = params.config().mean_loss;
    const double loss = nll_loss(logits, batch.targets, spans.response, mean);
    const Mat dlogits = nll_loss_grad(logits, batch.targets, spans.response, mean);
    decoder_backward(params, batch, trace, dlogits, grad);
    return loss;
}

GradCheckReport grad_check(const DecoderParams& params, const SequenceBatch& batch, const GradCheckOptions& options) {
    const std::size_t total = params.size();
    std::vector<double> analytic(total, 0.0);
    loss_and_grad(params, batch, analytic);
    if (options.fault_index < total) {
        analytic[options.fault_index] += options.fault_delta;
    }

    std::vector<std::size_t> coords;
    if (options.max_coords == 0 || options.max_coords >= total) {
        coords.resize(total);
        std::iota(coords.begin(), coords.end(), std::size_t{0});
    } else {
        // deterministic sample without replacement
        std::vector<std::size_t> all(total);
        std::iota(all.begin(), all.end(), std::size_t{0});
        Rng rng(options.sample_seed);
        rng.shuffle(all);
        coords.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(options.max_coords));
        std::sort(coords.begin(), coords.end());
        if (options.fault_index < total &&
            std::find(coords.begin(), coords.end(), options.fault_index) == coords.end()) {
            coords.push_back(options.fault_index);
        }
    }

    const SegmentSpans spans = segment_spans(batch.layout);
    const bool mean = params.config().mean_loss;
    DecoderParams probe = params;
    auto loss_at = [&](std::size_t index, double value) {
        const double saved = probe.flat()[index];
        probe.flat()[index] = value;
        const Mat logits = decoder_forward(probe, batch, nullptr);
        const double loss = nll_loss(logits, batch.targets, spans.response, mean);
        probe.flat()[index] = saved;
        return loss;
    };

    GradCheckReport report;
    report.checked = coords.size();
    for (std::size_t index : coords) {
        const double base = params.flat()[index];
        const double lp = loss_at(index, base + options.epsilon);
        const double lm = loss_at(index, base - options.epsilon);
        const double numeric = (lp - lm) / (2.0 * options.epsilon);
        const double a = analytic[index];
        const double rel = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
        if (rel > report.worst_rel) report.worst_rel = rel;
        if (rel > options.tolerance || report.worst.size() < 5) {
            GradCheckEntry e;
            e.index = index;
            e.name = params.coord_name(index);
            e.analytic = a;
            e.numeric = numeric;
            e.rel_err = rel;
            report.worst.push_back(e);
        }
    }
    std::sort(report.worst.begin(), report.worst.end(),
              [](const GradCheckEntry& a, const GradCheckEntry& b) { return a.rel_err > b.rel_err; });
    if (report.worst.size() > 5) report.worst.resize(5);
    report.pass = report.worst_rel <= options.tolerance;
    return report;
}

} // namespace slim
