#include "revhelp/model.hpp"

#include <algorithm>
#include <cmath>

namespace revhelp {

Tensor positional_encoding(std::size_t n, std::size_t l, double j) {
    if (l % 2 != 0)
        throw config_error("positional_encoding: dimension must be even, got " +
                           std::to_string(l));
    if (n < 1) throw config_error("positional_encoding: need at least one position");
    std::vector<double> data(n * l);
    for (std::size_t i = 0; i < l / 2; ++i) {
        const double denom = std::pow(j, (2.0 * static_cast<double>(i)) /
                                             static_cast<double>(l));
        for (std::size_t s = 0; s < n; ++s) {
            const double arg = static_cast<double>(s) / denom;
            data[s * l + 2 * i] = std::sin(arg);
            data[s * l + 2 * i + 1] = std::cos(arg);
        }
    }
    return Tensor::from_data({n, l}, std::move(data));
}

Variant variant_from_string(const std::string& name) {
    if (name == "full_max") return Variant::full_max;
    if (name == "s_avg") return Variant::s_avg;
    if (name == "s_attn") return Variant::s_attn;
    throw config_error("unknown model variant '" + name + "'");
}

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::full_max: return "full_max";
        case Variant::s_avg: return "s_avg";
        case Variant::s_attn: return "s_attn";
    }
    throw contract_error("unreachable variant");
}

namespace {

// Uniform in ±sqrt(6/(fan_in+fan_out)); keeps early activations well scaled.
Tensor glorot(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
              RngStream& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    return Tensor::uniform(std::move(shape), -bound, bound, rng, true);
}

}  // namespace

Tensor embed_with_position(const std::vector<int>& ids, const EmbeddingTable& emb,
                           const Tensor& pos) {
    if (ids.empty())
        throw degenerate_input_error("embed_with_position: empty token sequence");
    const std::size_t n = ids.size(), l = pos.dim(1);
    if (pos.dim(0) < n)
        throw shape_error("embed_with_position: positional matrix has " +
                          std::to_string(pos.dim(0)) + " rows, need " +
                          std::to_string(n));
    Tensor e = embedding_rows(emb.matrix, ids);
    Tensor pe = Tensor::from_data(
        {n, l}, std::vector<double>(pos.data().begin(), pos.data().begin() + n * l));
    return add(e, pe);
}

MultiHeadAttention make_attention(std::size_t l, std::size_t h,
                                  const std::string& scale_dim, RngStream& rng) {
    if (h < 1 || l % h != 0)
        throw config_error("attention: l must be divisible by h");
    const std::size_t d = l / h;
    MultiHeadAttention attn;
    attn.heads = h;
    for (std::size_t i = 0; i < h; ++i) {
        attn.w_q.push_back(glorot({l, d}, l, d, rng));
        attn.w_k.push_back(glorot({l, d}, l, d, rng));
        attn.w_v.push_back(glorot({l, d}, l, d, rng));
    }
    attn.w_o = glorot({l, l}, l, l, rng);
    if (scale_dim == "l")
        attn.scale = 1.0 / std::sqrt(static_cast<double>(l));
    else if (scale_dim == "d_k")
        attn.scale = 1.0 / std::sqrt(static_cast<double>(d));
    else
        throw config_error("attention: scale_dim must be 'd_k' or 'l'");
    return attn;
}

Tensor self_attention(const Tensor& eprime, const MultiHeadAttention& attn,
                      const std::vector<std::uint8_t>& pad_mask) {
    const std::size_t n = eprime.dim(0);
    if (pad_mask.size() != n)
        throw shape_error("self_attention: mask length " +
                          std::to_string(pad_mask.size()) + " != sequence length " +
                          std::to_string(n));
    if (std::find(pad_mask.begin(), pad_mask.end(), 1) == pad_mask.end())
        throw degenerate_input_error("self_attention: every position is masked");

    // Padded positions are masked out as keys for all queries.
    std::vector<std::uint8_t> col_mask(n * n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) col_mask[r * n + c] = pad_mask[c];

    std::vector<Tensor> heads;
    heads.reserve(attn.heads);
    for (std::size_t i = 0; i < attn.heads; ++i) {
        Tensor q = matmul(eprime, attn.w_q[i]);
        Tensor k = matmul(eprime, attn.w_k[i]);
        Tensor v = matmul(eprime, attn.w_v[i]);
        Tensor scores = scale(matmul(q, transpose(k)), attn.scale);
        Tensor weights = softmax_rows(scores, &col_mask);
        heads.push_back(matmul(weights, v));
    }
    Tensor joined = attn.heads == 1 ? heads[0] : concat_cols(heads);
    return matmul(joined, attn.w_o);
}

ConvBlock make_conv(std::size_t l, std::size_t c,
                    const std::vector<std::size_t>& widths, RngStream& rng) {
    ConvBlock conv;
    conv.widths = widths;
    conv.channels = c;
    for (std::size_t w : widths) {
        conv.kernels.push_back(glorot({w, l, c}, w * l, c, rng));
        conv.biases.push_back(Tensor::zeros({c}, true));
    }
    return conv;
}

Tensor conv_encode(const Tensor& context, const ConvBlock& conv, PoolMode mode,
                   std::size_t valid_len) {
    const std::size_t n = context.dim(0);
    const std::size_t widest = *std::max_element(conv.widths.begin(), conv.widths.end());
    if (valid_len > n)
        throw shape_error("conv_encode: valid_len exceeds sequence length");
    if (valid_len < widest)
        throw sequence_too_short_error(
            "conv_encode: sequence of " + std::to_string(valid_len) +
            " real tokens is shorter than the largest filter width " +
            std::to_string(widest));
    std::vector<Tensor> parts;
    parts.reserve(conv.widths.size());
    for (std::size_t i = 0; i < conv.widths.size(); ++i) {
        const std::size_t w = conv.widths[i];
        Tensor activ = relu(conv1d(context, w, conv.kernels[i], conv.biases[i]));
        // Windows touching any padded row are dropped: only the first
        // valid_len - w + 1 windows lie fully inside the real tokens.
        parts.push_back(pool_positions(activ, mode, valid_len - w + 1));
    }
    return parts.size() == 1 ? parts[0] : concat(parts);
}

Tensor conv_encode(const Tensor& context, const ConvBlock& conv, PoolMode mode) {
    return conv_encode(context, conv, mode, context.dim(0));
}

std::vector<std::pair<std::string, Tensor>> HelpfulnessModel::named_parameters()
    const {
    std::vector<std::pair<std::string, Tensor>> out;
    out.emplace_back("embedding", embedding.matrix);
    for (std::size_t i = 0; i < attn.heads; ++i) {
        const std::string p = "attn.head" + std::to_string(i) + ".";
        out.emplace_back(p + "w_q", attn.w_q[i]);
        out.emplace_back(p + "w_k", attn.w_k[i]);
        out.emplace_back(p + "w_v", attn.w_v[i]);
    }
    out.emplace_back("attn.w_o", attn.w_o);
    for (std::size_t i = 0; i < conv.widths.size(); ++i) {
        const std::string p = "conv.w" + std::to_string(conv.widths[i]) + ".";
        out.emplace_back(p + "kernels", conv.kernels[i]);
        out.emplace_back(p + "bias", conv.biases[i]);
    }
    out.emplace_back("head.w", head_w);
    out.emplace_back("head.b", head_b);
    return out;
}

std::vector<Tensor> HelpfulnessModel::trainable_parameters() const {
    std::vector<Tensor> out;
    for (auto& [name, t] : named_parameters())
        if (t.requires_grad()) out.push_back(t);
    return out;
}

HelpfulnessModel make_model(const RunConfig& cfg, EmbeddingTable embedding,
                            RngStream& rng) {
    cfg.validate();
    if (embedding.matrix.dim(1) != cfg.l)
        throw shape_error("make_model: embedding width " +
                          std::to_string(embedding.matrix.dim(1)) +
                          " does not match l=" + std::to_string(cfg.l));
    HelpfulnessModel m;
    m.config = cfg;
    m.variant = variant_from_string(cfg.variant);
    m.embedding = std::move(embedding);
    m.pos = positional_encoding(cfg.max_len, cfg.l, cfg.j);
    m.attn = make_attention(cfg.l, cfg.h, cfg.scale_dim, rng);
    // the attention-only variant reads the context directly; it has no
    // convolution stage and no parameters for one
    if (m.variant != Variant::s_attn)
        m.conv = make_conv(cfg.l, cfg.c, cfg.filters, rng);
    const std::size_t head_dim =
        m.variant == Variant::s_attn ? cfg.l : cfg.filters.size() * cfg.c;
    m.head_w = glorot({head_dim}, head_dim, 1, rng);
    m.head_b = Tensor::zeros({1}, true);
    return m;
}

Tensor predict_graph(const std::vector<int>& ids, std::size_t valid_len,
                     const HelpfulnessModel& m, bool training, RngStream& rng) {
    const std::size_t n = ids.size();
    if (n == 0 || valid_len == 0)
        throw degenerate_input_error("predict: empty token sequence");
    if (valid_len > n)
        throw contract_error("predict: valid_len exceeds id count");
    if (n > m.config.max_len)
        throw contract_error("predict: sequence longer than max_len");

    Tensor eprime = embed_with_position(ids, m.embedding, m.pos);

    std::vector<std::uint8_t> mask(n, 0);
    std::fill_n(mask.begin(), valid_len, 1);
    Tensor context = self_attention(eprime, m.attn, mask);

    Tensor features;
    switch (m.variant) {
        case Variant::full_max:
            features = conv_encode(context, m.conv, PoolMode::max, valid_len);
            break;
        case Variant::s_avg:
            features = conv_encode(context, m.conv, PoolMode::avg, valid_len);
            break;
        case Variant::s_attn:
            features = mean_rows(context, valid_len);
            break;
    }
    features = dropout(features, m.config.dropout, rng, training);
    return add(sum(mul(m.head_w, features)), m.head_b);
}

double predict(const TokenizedReview& review, const HelpfulnessModel& m,
               bool training, RngStream& rng) {
    std::vector<int> ids = review.token_ids;
    const std::size_t widest =
        *std::max_element(m.config.filters.begin(), m.config.filters.end());
    std::size_t valid_len = ids.size();
    if (valid_len < widest) {
        // Too short for the widest filter: pad up and treat the padding as
        // real content so pooling has at least one window.
        ids.resize(widest, Vocabulary::pad_id);
        valid_len = widest;
    }
    return predict_graph(ids, valid_len, m, training, rng).value();
}

double clamp_score(double raw) { return std::min(1.0, std::max(0.0, raw)); }

}  // namespace revhelp
