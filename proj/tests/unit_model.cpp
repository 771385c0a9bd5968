#include <cmath>
#include <vector>

#include "doctest.h"
#include "revhelp/gradcheck.hpp"
#include "revhelp/model.hpp"

using namespace revhelp;

namespace {

Tensor identity_matrix(std::size_t n) {
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 1.0;
    return Tensor::from_data({n, n}, d);
}

EmbeddingTable table_from(const std::vector<std::size_t>& shape,
                          std::vector<double> data, bool trainable = false) {
    EmbeddingTable t;
    t.matrix = Tensor::from_data(shape, std::move(data), trainable);
    t.trainable = trainable;
    return t;
}

RunConfig tiny_config() {
    RunConfig cfg;
    cfg.l = 4;
    cfg.h = 2;
    cfg.c = 2;
    cfg.filters = {1, 2};
    cfg.dropout = 0.0;
    cfg.max_len = 8;
    return cfg;
}

}  // namespace

TEST_CASE("positional encoding values") {
    Tensor pe = positional_encoding(3, 4, 1000.0);
    CHECK(pe.shape() == std::vector<std::size_t>{3, 4});
    // position 0 alternates sin(0)=0, cos(0)=1 exactly
    CHECK(pe.at(0, 0) == 0.0);
    CHECK(pe.at(0, 1) == 1.0);
    CHECK(pe.at(0, 2) == 0.0);
    CHECK(pe.at(0, 3) == 1.0);
    // first column pair has divisor 1000^0 = 1
    CHECK(pe.at(1, 0) == doctest::Approx(0.8414709848078965).epsilon(1e-15));
    CHECK(pe.at(1, 1) == doctest::Approx(0.5403023058681398).epsilon(1e-15));
    CHECK(pe.at(2, 0) == doctest::Approx(0.9092974268256817).epsilon(1e-15));
    // second pair divides position by 1000^(2/4)
    CHECK(pe.at(1, 2) == doctest::Approx(0.03161750640244).epsilon(1e-9));

    // divisor exactly 10 when j=100, l=4
    Tensor pj = positional_encoding(2, 4, 100.0);
    CHECK(pj.at(1, 2) == doctest::Approx(0.09983341664682815).epsilon(1e-15));

    Tensor wide = positional_encoding(50, 10, 1000.0);
    for (double v : wide.data()) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }

    CHECK_THROWS_AS(positional_encoding(3, 5, 1000.0), config_error);
    CHECK_THROWS_AS(positional_encoding(0, 4, 1000.0), config_error);
}

TEST_CASE("embedding plus position") {
    // zero embeddings leave just the positional signal
    EmbeddingTable zero = table_from({3, 4}, std::vector<double>(12, 0.0));
    Tensor pe = positional_encoding(6, 4, 1000.0);
    Tensor out = embed_with_position({2, 0, 1}, zero, pe);
    REQUIRE(out.shape() == std::vector<std::size_t>{3, 4});
    for (std::size_t s = 0; s < 3; ++s)
        for (std::size_t i = 0; i < 4; ++i) CHECK(out.at(s, i) == pe.at(s, i));

    EmbeddingTable emb =
        table_from({2, 4}, {10, 20, 30, 40, 50, 60, 70, 80});
    Tensor shifted = embed_with_position({1, 1}, emb, pe);
    CHECK(shifted.at(0, 0) == 50.0 + pe.at(0, 0));
    CHECK(shifted.at(1, 1) == 60.0 + pe.at(1, 1));

    CHECK_THROWS_AS(embed_with_position({}, emb, pe), degenerate_input_error);
    Tensor short_pe = positional_encoding(1, 4, 1000.0);
    CHECK_THROWS_AS(embed_with_position({0, 1}, emb, short_pe), shape_error);
}

TEST_CASE("self attention with identity construction averages rows") {
    // W_Q = W_K = 0 makes every score equal, so softmax is uniform over the
    // unmasked positions; with W_V = W_O = I each output row is their mean.
    const std::size_t l = 2;
    MultiHeadAttention attn;
    attn.heads = 1;
    attn.w_q = {Tensor::zeros({l, l})};
    attn.w_k = {Tensor::zeros({l, l})};
    attn.w_v = {identity_matrix(l)};
    attn.w_o = identity_matrix(l);
    attn.scale = 1.0 / std::sqrt(static_cast<double>(l));

    Tensor x = Tensor::from_data({3, 2}, {1, 2, 3, 4, 5, 6});
    Tensor out = self_attention(x, attn, {1, 1, 1});
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(out.at(r, 0) == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(out.at(r, 1) == doctest::Approx(4.0).epsilon(1e-12));
    }

    Tensor masked = self_attention(x, attn, {1, 1, 0});
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(masked.at(r, 0) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(masked.at(r, 1) == doctest::Approx(3.0).epsilon(1e-12));
    }

    Tensor single = Tensor::from_data({1, 2}, {7, 9});
    Tensor self = self_attention(single, attn, {1});
    CHECK(self.at(0, 0) == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(self.at(0, 1) == doctest::Approx(9.0).epsilon(1e-12));

    CHECK_THROWS_AS(self_attention(x, attn, {0, 0, 0}), degenerate_input_error);
    CHECK_THROWS_AS(self_attention(x, attn, {1, 1}), shape_error);
}

TEST_CASE("self attention permutes with its input") {
    const std::size_t l = 4, n = 5;
    RngStream rng(11);
    MultiHeadAttention attn = make_attention(l, 2, "d_k", rng);
    Tensor x = Tensor::uniform({n, l}, -1.0, 1.0, rng);

    const std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
    std::vector<double> pdata(n * l);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t i = 0; i < l; ++i) pdata[r * l + i] = x.at(perm[r], i);
    Tensor px = Tensor::from_data({n, l}, pdata);

    Tensor out = self_attention(x, attn, std::vector<std::uint8_t>(n, 1));
    Tensor pout = self_attention(px, attn, std::vector<std::uint8_t>(n, 1));
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t i = 0; i < l; ++i)
            CHECK(pout.at(r, i) ==
                  doctest::Approx(out.at(perm[r], i)).epsilon(1e-9));
}

TEST_CASE("scale choice changes attention output") {
    RngStream r1(5), r2(5);
    MultiHeadAttention by_dk = make_attention(4, 2, "d_k", r1);
    MultiHeadAttention by_l = make_attention(4, 2, "l", r2);
    CHECK(by_dk.scale == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(by_l.scale == doctest::Approx(1.0 / std::sqrt(4.0)).epsilon(1e-15));
    // identical weights otherwise
    CHECK(by_dk.w_o.data() == by_l.w_o.data());
}

TEST_CASE("convolutional encoding on a hand example") {
    // all-ones kernels reduce each window to the plain sum of its entries
    const std::size_t l = 2;
    ConvBlock conv;
    conv.widths = {1, 2, 3};
    conv.channels = 1;
    for (std::size_t w : conv.widths) {
        conv.kernels.push_back(
            Tensor::from_data({w, l, 1}, std::vector<double>(w * l, 1.0)));
        conv.biases.push_back(Tensor::zeros({1}));
    }

    Tensor x = Tensor::from_data({4, 2}, {1, 0, 0, 2, 3, 1, 2, 2});
    Tensor pooled = conv_encode(x, conv, PoolMode::max, 4);
    REQUIRE(pooled.numel() == 3);
    CHECK(pooled.at(0) == doctest::Approx(4.0).epsilon(1e-12));   // row sums 1,2,4,4
    CHECK(pooled.at(1) == doctest::Approx(8.0).epsilon(1e-12));   // pair sums 3,6,8
    CHECK(pooled.at(2) == doctest::Approx(10.0).epsilon(1e-12));  // triple sums 7,10

    Tensor averaged = conv_encode(x, conv, PoolMode::avg, 4);
    CHECK(averaged.at(0) == doctest::Approx(11.0 / 4.0).epsilon(1e-12));
    CHECK(averaged.at(1) == doctest::Approx(17.0 / 3.0).epsilon(1e-12));
    CHECK(averaged.at(2) == doctest::Approx(17.0 / 2.0).epsilon(1e-12));

    // shortening the valid prefix hides the later windows
    Tensor prefix = conv_encode(x, conv, PoolMode::max, 3);
    CHECK(prefix.at(0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(prefix.at(1) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(prefix.at(2) == doctest::Approx(7.0).epsilon(1e-12));

    // trailing garbage rows beyond valid_len cannot influence the result
    Tensor padded = Tensor::from_data(
        {6, 2}, {1, 0, 0, 2, 3, 1, 2, 2, 99, -99, 50, 50});
    Tensor same = conv_encode(padded, conv, PoolMode::max, 4);
    for (std::size_t i = 0; i < 3; ++i) CHECK(same.at(i) == pooled.at(i));

    CHECK_THROWS_AS(conv_encode(x, conv, PoolMode::max, 2),
                    sequence_too_short_error);
    CHECK_THROWS_AS(conv_encode(x, conv, PoolMode::max, 5), shape_error);
}

TEST_CASE("negative pre-activations are clipped before pooling") {
    ConvBlock conv;
    conv.widths = {1};
    conv.channels = 3;
    conv.kernels = {Tensor::zeros({1, 2, 3})};
    conv.biases = {Tensor::from_data({3}, {0.5, -0.3, 0.2})};
    Tensor x = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    Tensor out = conv_encode(x, conv, PoolMode::max, 2);
    CHECK(out.at(0) == 0.5);
    CHECK(out.at(1) == 0.0);
    CHECK(out.at(2) == 0.2);
}

TEST_CASE("model construction sizes the readout by variant") {
    RunConfig cfg = tiny_config();
    RngStream rng(7);
    Vocabulary v = Vocabulary::build({{"x", "y", "z"}}, 1);

    HelpfulnessModel m =
        make_model(cfg, random_embeddings(v, cfg.l, rng, true), rng);
    CHECK(m.head_w.numel() == cfg.filters.size() * cfg.c);
    CHECK(m.head_b.numel() == 1);
    CHECK(m.pos.shape() == std::vector<std::size_t>{cfg.max_len, cfg.l});

    RunConfig acg = tiny_config();
    acg.variant = "s_attn";
    RngStream rng2(7);
    HelpfulnessModel ma =
        make_model(acg, random_embeddings(v, acg.l, rng2, true), rng2);
    CHECK(ma.head_w.numel() == acg.l);

    // parameter listing is stable, complete and deduplicated
    auto names = m.named_parameters();
    REQUIRE(names.size() == 2 + 3 * cfg.h + 2 + 2 * cfg.filters.size());
    CHECK(names.front().first == "embedding");
    CHECK(names[1].first == "attn.head0.w_q");
    CHECK(names.back().first == "head.b");
    CHECK(m.trainable_parameters().size() == names.size());

    RunConfig bad = tiny_config();
    bad.l = 6;  // embedding width no longer matches
    RngStream rng3(7);
    CHECK_THROWS_AS(make_model(bad, random_embeddings(v, 4, rng3, true), rng3),
                    shape_error);
}

TEST_CASE("prediction behaviour") {
    RunConfig cfg = tiny_config();
    RngStream rng(13);
    Vocabulary v = Vocabulary::build({{"a", "b", "c", "d"}}, 1);
    HelpfulnessModel m =
        make_model(cfg, random_embeddings(v, cfg.l, rng, true), rng);
    RngStream eval_rng(0);

    SUBCASE("zeroed readout predicts the bias alone") {
        std::fill(m.head_w.data().begin(), m.head_w.data().end(), 0.0);
        std::fill(m.head_b.data().begin(), m.head_b.data().end(), 0.0);
        TokenizedReview r{{2, 3, 4}, 3};
        CHECK(predict(r, m, false, eval_rng) == 0.0);
        m.head_b.data()[0] = 2.5;
        CHECK(predict(r, m, false, eval_rng) == 2.5);
        CHECK(clamp_score(predict(r, m, false, eval_rng)) == 1.0);
    }

    SUBCASE("inference is deterministic") {
        TokenizedReview r{{2, 3, 4, 5}, 4};
        double a = predict(r, m, false, eval_rng);
        double b = predict(r, m, false, eval_rng);
        CHECK(a == b);
        CHECK(std::isfinite(a));
    }

    SUBCASE("reviews shorter than the widest filter are padded up") {
        TokenizedReview tiny{{3}, 1};
        double direct = predict(tiny, m, false, eval_rng);
        std::vector<int> ids = {3, Vocabulary::pad_id};
        double manual = predict_graph(ids, 2, m, false, eval_rng).value();
        CHECK(direct == manual);
    }

    SUBCASE("padding beyond valid_len does not move the score") {
        std::vector<int> ids = {2, 3, 4, 5};
        double bare = predict_graph(ids, 4, m, false, eval_rng).value();
        std::vector<int> padded = {2, 3, 4, 5, 0, 0, 0};
        double grown = predict_graph(padded, 4, m, false, eval_rng).value();
        CHECK(std::abs(bare - grown) < 1e-9);
    }

    SUBCASE("token order matters because of the positional signal") {
        double fwd = predict_graph({2, 3, 4, 5}, 4, m, false, eval_rng).value();
        double rev = predict_graph({5, 4, 3, 2}, 4, m, false, eval_rng).value();
        CHECK(std::abs(fwd - rev) > 1e-9);
    }

    SUBCASE("contract violations") {
        CHECK_THROWS_AS(predict_graph({}, 0, m, false, eval_rng),
                        degenerate_input_error);
        CHECK_THROWS_AS(predict_graph({2, 3}, 5, m, false, eval_rng),
                        contract_error);
        std::vector<int> long_ids(cfg.max_len + 1, 2);
        CHECK_THROWS_AS(
            predict_graph(long_ids, long_ids.size(), m, false, eval_rng),
            contract_error);
    }

    SUBCASE("clamp") {
        CHECK(clamp_score(-0.25) == 0.0);
        CHECK(clamp_score(0.25) == 0.25);
        CHECK(clamp_score(1.25) == 1.0);
    }
}

TEST_CASE("every variant survives an end-to-end gradient check") {
    for (const char* variant : {"full_max", "s_avg", "s_attn"}) {
        CAPTURE(variant);
        RunConfig cfg = tiny_config();
        cfg.variant = variant;
        RngStream rng(21);
        Vocabulary v = Vocabulary::build({{"p", "q", "r", "s"}}, 1);
        HelpfulnessModel m =
            make_model(cfg, random_embeddings(v, cfg.l, rng, true), rng);

        const std::vector<int> ids = {2, 3, 4, 5, 2};
        RngStream fwd_rng(0);
        auto f = [&]() {
            Tensor raw = predict_graph(ids, 4, m, false, fwd_rng);
            return mul(raw, raw);  // quadratic keeps the check nontrivial
        };
        GradCheckResult res =
            gradient_check(f, m.named_parameters(), 1e-5, 6);
        CAPTURE(res.worst_param);
        CAPTURE(res.max_rel_error);
        CHECK(res.passed(1e-3));
    }
}
