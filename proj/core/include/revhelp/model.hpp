#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "revhelp/config.hpp"
#include "revhelp/ops.hpp"
#include "revhelp/text.hpp"

namespace revhelp {

// Sinusoidal position/dimension matrix [n×l]: column 2i carries
// sin(s / j^(2i/l)) and column 2i+1 carries cos(s / j^(2i/l)) for position s
// counted from 0. Values lie in [-1, 1]; odd l is a configuration error.
Tensor positional_encoding(std::size_t n, std::size_t l, double j);

enum class Variant { full_max, s_avg, s_attn };
Variant variant_from_string(const std::string& name);
std::string variant_name(Variant v);

// Embedding rows plus the matching positional rows: e' = E[ids] + PE[0..n).
// pos must hold at least ids.size() rows.
Tensor embed_with_position(const std::vector<int>& ids, const EmbeddingTable& emb,
                           const Tensor& pos);

struct MultiHeadAttention {
    std::size_t heads = 0;
    std::vector<Tensor> w_q, w_k, w_v;  // per head, [l × l/h]
    Tensor w_o;                         // [l × l]
    double scale = 1.0;                 // applied to QK^T scores
};

MultiHeadAttention make_attention(std::size_t l, std::size_t h,
                                  const std::string& scale_dim, RngStream& rng);

// pad_mask has one entry per position, nonzero = real token. Padded
// positions are excluded as attention targets for every query; output rows at
// padded positions are finite but carry no meaning (downstream pooling never
// reads them).
Tensor self_attention(const Tensor& eprime, const MultiHeadAttention& attn,
                      const std::vector<std::uint8_t>& pad_mask);

struct ConvBlock {
    std::vector<std::size_t> widths;
    std::vector<Tensor> kernels;  // per width, [w×l×c]
    std::vector<Tensor> biases;   // per width, [c]
    std::size_t channels = 0;
};

ConvBlock make_conv(std::size_t l, std::size_t c, const std::vector<std::size_t>& widths,
                    RngStream& rng);

// Per width: valid convolution, RELU, pool over window positions; results
// concatenated in width order. Only windows that lie entirely inside the
// first valid_len rows are pooled, so padding cannot leak into the result.
Tensor conv_encode(const Tensor& context, const ConvBlock& conv, PoolMode mode,
                   std::size_t valid_len);
Tensor conv_encode(const Tensor& context, const ConvBlock& conv, PoolMode mode);

struct HelpfulnessModel {
    RunConfig config;
    Variant variant = Variant::full_max;
    EmbeddingTable embedding;
    Tensor pos;  // cached positional encoding [max_len × l], constant
    MultiHeadAttention attn;
    ConvBlock conv;
    Tensor head_w;  // [widths·c], or [l] for the attention-only variant
    Tensor head_b;  // scalar

    // Stable name->tensor order: embedding, attention, conv, head. Includes
    // frozen tensors (checkpoints carry everything).
    std::vector<std::pair<std::string, Tensor>> named_parameters() const;
    // Only tensors the optimizer updates.
    std::vector<Tensor> trainable_parameters() const;
};

// Fresh model with seeded initialization. The embedding table is built by the
// caller (it depends on the vocabulary and optional pre-trained vectors).
HelpfulnessModel make_model(const RunConfig& cfg, EmbeddingTable embedding,
                            RngStream& rng);

// Forward pass over already-padded ids. valid_len counts the real tokens;
// ids may carry PAD entries beyond it. Returns the raw (unclamped) score
// node. rng is consumed only when training (dropout).
Tensor predict_graph(const std::vector<int>& ids, std::size_t valid_len,
                     const HelpfulnessModel& m, bool training, RngStream& rng);

// Convenience: raw score for one review. Reviews shorter than the largest
// filter width are padded up to it, the padding treated as real positions so
// the convolution has at least one window.
double predict(const TokenizedReview& review, const HelpfulnessModel& m,
               bool training, RngStream& rng);

double clamp_score(double raw);

}  // namespace revhelp
