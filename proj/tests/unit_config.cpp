#include "doctest.h"
#include "revhelp/config.hpp"

using namespace revhelp;

TEST_CASE("defaults are valid and round-trip through text") {
    RunConfig cfg;
    cfg.validate();
    RunConfig back = RunConfig::from_text(cfg.canonical_text());
    CHECK(back.canonical_text() == cfg.canonical_text());
    CHECK(back.l == 100);
    CHECK(back.h == 2);
    CHECK(back.filters == std::vector<std::size_t>{1, 2, 3});
    CHECK(back.dropout == 0.5);
    CHECK(back.scale_dim == "d_k");
    CHECK(back.variant == "full_max");
}

TEST_CASE("from_text parsing") {
    RunConfig cfg = RunConfig::from_text(
        "# comment\n"
        "\n"
        "l = 64\n"
        "filters = 2,3\n"
        "dropout = 0.1\n"
        "train_embeddings = false\n");
    CHECK(cfg.l == 64);
    CHECK(cfg.filters == std::vector<std::size_t>{2, 3});
    CHECK(cfg.dropout == 0.1);
    CHECK_FALSE(cfg.train_embeddings);

    CHECK_THROWS_AS(RunConfig::from_text("mystery = 1\n"), config_error);
    CHECK_THROWS_AS(RunConfig::from_text("l\n"), config_error);
    CHECK_THROWS_AS(RunConfig::from_text("l = banana\n"), config_error);
}

TEST_CASE("validate rejects bad settings") {
    const auto broken = [](auto&& tweak) {
        RunConfig cfg;
        tweak(cfg);
        return cfg;
    };
    CHECK_THROWS_AS(broken([](RunConfig& c) { c.l = 7; }).validate(), config_error);
    CHECK_THROWS_AS(broken([](RunConfig& c) { c.h = 3; }).validate(), config_error);
    CHECK_THROWS_AS(broken([](RunConfig& c) { c.j = 1.0; }).validate(), config_error);
    CHECK_THROWS_AS(broken([](RunConfig& c) { c.j = 20000.0; }).validate(),
                    config_error);
    CHECK_THROWS_AS(broken([](RunConfig& c) { c.filters = {}; }).validate(),
                    config_error);
    CHECK_THROWS_AS(broken([](RunConfig& c) { c.filters = {2, 2}; }).validate(),
                    config_error);
    CHECK_THROWS_AS(broken([](RunConfig& c) { c.filters = {4}; }).validate(),
                    config_error);
    CHECK_THROWS_AS(broken([](RunConfig& c) { c.dropout = 1.0; }).validate(),
                    config_error);
    CHECK_THROWS_AS(broken([](RunConfig& c) { c.max_len = 6; }).validate(),
                    config_error);
    CHECK_THROWS_AS(broken([](RunConfig& c) { c.scale_dim = "n"; }).validate(),
                    config_error);
    CHECK_THROWS_AS(broken([](RunConfig& c) { c.variant = "other"; }).validate(),
                    config_error);
    CHECK_THROWS_AS(broken([](RunConfig& c) { c.min_words = 2; }).validate(),
                    config_error);
    CHECK_THROWS_AS(broken([](RunConfig& c) { c.split = {70, 30}; }).validate(),
                    config_error);
    CHECK_THROWS_AS(broken([](RunConfig& c) { c.split = {70, 30, 0}; }).validate(),
                    config_error);
    // zero learning rate is allowed: it freezes training on purpose
    broken([](RunConfig& c) { c.learning_rate = 0.0; }).validate();
    CHECK_THROWS_AS(
        broken([](RunConfig& c) { c.learning_rate = -0.1; }).validate(),
        config_error);
}

TEST_CASE("fingerprint tracks architecture, not bookkeeping") {
    RunConfig a;
    RunConfig b;
    CHECK(a.fingerprint(7) == b.fingerprint(7));
    CHECK(a.fingerprint(7) != a.fingerprint(8));

    b.seed = 999;          // training detail, not architecture
    b.epochs = 3;
    b.out = "elsewhere";
    CHECK(a.fingerprint(7) == b.fingerprint(7));

    b.c = 32;              // architecture change
    CHECK(a.fingerprint(7) != b.fingerprint(7));
}
