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
#include <span>
#include <string>
#include <vector>

#include "slim/mask.hpp"
#include "slim/mat.hpp"

namespace slim {

/// Desk-scale masked decoder: token + position embeddings, n_layers blocks of
/// (multi-head masked attention + residual, tanh FFN + residual), linear
/// output head. Bias-free, no normalization layers, f64 throughout.
struct DecoderConfig {
    int n_layers = 2;
    int n_heads = 2;
    int d_model = 20;
    int d_head = 10;
    int d_ff = 32;
    int vocab_size = 20;
    int max_positions = 32;
    // Object tokens share one learned position embedding so the object
    // segment is genuinely order-free; switch off to give every token its own
    // position (the order-sensitive baseline).
    bool shared_object_position = true;
    bool mean_loss = true; // mean over target tokens, else sum

    /// Throws ConfigError when shapes are inconsistent or outside the pinned
    /// toy scale (<= 2 layers, <= 4 heads, d_model <= 64, vocab <= 512).
    void validate() const;
};

/// Named view into the flat parameter vector.
struct ParamView {
    std::string name; // e.g. "embedding", "layer0.head1.wq", "out"
    std::size_t offset = 0;
    int rows = 0;
    int cols = 0;
};

class DecoderParams {
public:
    explicit DecoderParams(DecoderConfig config); // zero-initialized
    static DecoderParams random(const DecoderConfig& config, std::uint64_t seed);

    const DecoderConfig& config() const { return config_; }
    std::size_t size() const { return flat_.size(); }
    std::vector<double>& flat() { return flat_; }
    const std::vector<double>& flat() const { return flat_; }

    MatRef embedding() { return view_ref(embedding_); }
    MatRef positions() { return view_ref(positions_); }
    MatRef wq(int layer, int head) { return view_ref(wq_[idx(layer, head)]); }
    MatRef wk(int layer, int head) { return view_ref(wk_[idx(layer, head)]); }
    MatRef wv(int layer, int head) { return view_ref(wv_[idx(layer, head)]); }
    MatRef wo(int layer) { return view_ref(wo_[layer]); }
    MatRef w1(int layer) { return view_ref(w1_[layer]); }
    MatRef w2(int layer) { return view_ref(w2_[layer]); }
    MatRef out() { return view_ref(out_); }

    CMatRef embedding() const { return view_cref(embedding_); }
    CMatRef positions() const { return view_cref(positions_); }
    CMatRef wq(int layer, int head) const { return view_cref(wq_[idx(layer, head)]); }
    CMatRef wk(int layer, int head) const { return view_cref(wk_[idx(layer, head)]); }
    CMatRef wv(int layer, int head) const { return view_cref(wv_[idx(layer, head)]); }
    CMatRef wo(int layer) const { return view_cref(wo_[layer]); }
    CMatRef w1(int layer) const { return view_cref(w1_[layer]); }
    CMatRef w2(int layer) const { return view_cref(w2_[layer]); }
    CMatRef out() const { return view_cref(out_); }

    const std::vector<ParamView>& views() const { return views_; }

    /// "layer0.head1.wq[2,3]" for a flat index; used by the gradient checker.
    std::string coord_name(std::size_t flat_index) const;

    /// Gradient buffers reuse the same layout; these map a view onto any
    /// vector of matching length.
    MatRef view_in(std::span<double> buffer, const ParamView& view) const;

private:
    std::size_t idx(int layer, int head) const { return static_cast<std::size_t>(layer) * config_.n_heads + head; }
    MatRef view_ref(std::size_t view_index) {
        const ParamView& v = views_[view_index];
        return MatRef(flat_.data() + v.offset, v.rows, v.cols);
    }
    CMatRef view_cref(std::size_t view_index) const {
        const ParamView& v = views_[view_index];
        return CMatRef(flat_.data() + v.offset, v.rows, v.cols);
    }

    DecoderConfig config_;
    std::vector<double> flat_;
    std::vector<ParamView> views_;
    std::size_t embedding_ = 0, positions_ = 0, out_ = 0;
    std::vector<std::size_t> wq_, wk_, wv_, wo_, w1_, w2_;

    friend struct ParamLayoutBuilder;
};

/// One token sequence plus its mask and (optional) response targets.
struct SequenceBatch {
    std::vector<int> tokens;
    TokenLayout layout;
    AttentionMask mask;
    std::vector<int> targets; // layout.total() entries, -1 = no target

    /// Throws ConfigError on length/shape mismatches or out-of-range tokens.
    void validate(const DecoderConfig& config) const;
};

/// Cached activations for the backward pass.
struct ForwardTrace {
    std::vector<Mat> x_in;      // per layer input
    std::vector<Mat> q, k, v;   // per layer*head
    std::vector<Mat> probs;     // per layer*head attention weights
    std::vector<Mat> head_out;  // per layer*head
    std::vector<Mat> concat;    // per layer
    std::vector<Mat> x_mid;     // per layer, after attention residual
    std::vector<Mat> ffn_h;     // per layer, tanh output
    Mat x_final;
};

/// Per-position logits (n x vocab). Every layer's attention uses batch.mask.
Mat decoder_forward(const DecoderParams& params, const SequenceBatch& batch, ForwardTrace* trace = nullptr);

/// Negative log-likelihood of the targets over the response span. Throws
/// ContractViolation when the span holds no targets.
double nll_loss(const Mat& logits, const std::vector<int>& targets, Span response_span, bool mean);

/// Loss gradient w.r.t. logits (same shape, zero outside target rows).
Mat nll_loss_grad(const Mat& logits, const std::vector<int>& targets, Span response_span, bool mean);

/// Accumulates dLoss/dParams into grad (length params.size()).
void decoder_backward(const DecoderParams& params, const SequenceBatch& batch, const ForwardTrace& trace,
                      const Mat& dlogits, std::span<double> grad);

/// Convenience: forward + loss + backward. Returns the loss.
double loss_and_grad(const DecoderParams& params, const SequenceBatch& batch, std::span<double> grad);

struct GradCheckEntry {
    std::size_t index = 0;
    std::string name;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_err = 0.0;
};

struct GradCheckReport {
    bool pass = false;
    double worst_rel = 0.0;
    std::size_t checked = 0;
    std::vector<GradCheckEntry> worst; // sorted, worst first
};

struct GradCheckOptions {
    double epsilon = 1e-5;
    double tolerance = 1e-4;
    // 0 checks every coordinate; otherwise a deterministic sample of this size.
    std::size_t max_coords = 0;
    std::uint64_t sample_seed = 0;
    // Test seam: perturb one analytic gradient coordinate before comparing,
    // to prove the checker catches a wrong gradient.
    std::size_t fault_index = static_cast<std::size_t>(-1);
    double fault_delta = 0.0;
};

/// Central-difference check of the analytic gradient. Relative error metric:
/// |a - n| / max(1, |a|, |n|).
GradCheckReport grad_check(const DecoderParams& params, const SequenceBatch& batch, const GradCheckOptions& options);

} // namespace slim
