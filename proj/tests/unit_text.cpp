#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "revhelp/text.hpp"

using namespace revhelp;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("revhelp_text_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static inline int counter = 0;
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace

TEST_CASE("tokenize") {
    CHECK(tokenize("Great charger!") ==
          std::vector<std::string>{"great", "charger", "!"});
    CHECK(tokenize("  ") == std::vector<std::string>{});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("No more heat issues") ==
          std::vector<std::string>{"no", "more", "heat", "issues"});
    CHECK(tokenize("(Really?!) WOW-ok") ==
          std::vector<std::string>{"(", "really", "?", "!", ")", "wow-ok"});
    CHECK(tokenize("!!!") == std::vector<std::string>{"!", "!", "!"});
    CHECK(tokenize("don't stop") == std::vector<std::string>{"don't", "stop"});
    // multi-byte characters pass through untouched
    CHECK(tokenize("Caf\xc3\xa9 time") ==
          std::vector<std::string>{"caf\xc3\xa9", "time"});
}

TEST_CASE("vocabulary construction") {
    Vocabulary v = Vocabulary::build({{"a", "b", "a"}}, 1);
    CHECK(v.size() == 4);
    CHECK(v.id("a") == 2);  // frequency 2 ahead of b's 1
    CHECK(v.id("b") == 3);
    CHECK(v.id("missing") == Vocabulary::unk_id);
    CHECK(v.token(0) == Vocabulary::pad_token);
    CHECK(v.token(1) == Vocabulary::unk_token);

    Vocabulary strict = Vocabulary::build({{"a", "b", "a"}}, 2);
    CHECK(strict.size() == 3);
    CHECK(strict.contains("a"));
    CHECK_FALSE(strict.contains("b"));

    // frequency ties resolved lexicographically
    Vocabulary ties = Vocabulary::build({{"b", "a", "b", "a", "c"}}, 1);
    CHECK(ties.id("a") == 2);
    CHECK(ties.id("b") == 3);
    CHECK(ties.id("c") == 4);

    CHECK(Vocabulary::build({{"a"}}, 1).fingerprint() ==
          Vocabulary::build({{"a"}}, 1).fingerprint());
    CHECK(Vocabulary::build({{"a"}}, 1).fingerprint() !=
          Vocabulary::build({{"b"}}, 1).fingerprint());

    CHECK_THROWS_AS(Vocabulary::build({}, 0), config_error);
    CHECK(Vocabulary::build({}, 1).size() == 2);  // specials only
}

TEST_CASE("vocabulary save, load and from_tokens") {
    TempDir tmp;
    Vocabulary v = Vocabulary::build({{"alpha", "beta", "alpha"}}, 1);
    v.save(tmp.file("vocab.txt"));
    Vocabulary loaded = Vocabulary::load(tmp.file("vocab.txt"));
    CHECK(loaded.tokens() == v.tokens());
    CHECK(loaded.fingerprint() == v.fingerprint());

    Vocabulary rebuilt = Vocabulary::from_tokens(v.tokens());
    CHECK(rebuilt.id("beta") == v.id("beta"));

    write_file(tmp.file("bad.txt"), "nope\n<unk>\n");
    CHECK_THROWS_AS(Vocabulary::load(tmp.file("bad.txt")), format_error);
    CHECK_THROWS_AS(Vocabulary::load(tmp.file("absent.txt")), io_error);
    CHECK_THROWS_AS(Vocabulary::from_tokens({"<pad>"}), format_error);
}

TEST_CASE("pretrained embedding loading") {
    TempDir tmp;
    const std::size_t l = 4;
    write_file(tmp.file("vectors.txt"),
               "good 1 2 3 4\n"
               "bad -1 0 0.5 2\n"
               "unrelated 9 9 9 9\n");
    Vocabulary v = Vocabulary::build({{"good", "bad", "novel"}}, 1);

    RngStream rng(3);
    EmbeddingTable table = load_pretrained(tmp.file("vectors.txt"), v, l, rng);
    CHECK(table.matrix.shape() == std::vector<std::size_t>{5, l});
    CHECK(table.matrix.requires_grad());

    const auto row = [&](int id) {
        std::vector<double> r(l);
        for (std::size_t i = 0; i < l; ++i) r[i] = table.matrix.at(id, i);
        return r;
    };
    CHECK(row(v.id("good")) == std::vector<double>{1, 2, 3, 4});
    CHECK(row(v.id("bad")) == std::vector<double>{-1, 0, 0.5, 2});
    for (double x : row(v.id("novel"))) {
        CHECK(x >= -0.05);
        CHECK(x <= 0.05);
    }
    // UNK is the mean of the two copied rows, PAD is pinned to zero
    CHECK(row(Vocabulary::unk_id) == std::vector<double>{0, 1, 1.75, 3});
    CHECK(row(Vocabulary::pad_id) == std::vector<double>{0, 0, 0, 0});

    RngStream r1(3), r2(3);
    EmbeddingTable t1 = load_pretrained(tmp.file("vectors.txt"), v, l, r1);
    EmbeddingTable t2 = load_pretrained(tmp.file("vectors.txt"), v, l, r2);
    CHECK(t1.matrix.data() == t2.matrix.data());

    write_file(tmp.file("short.txt"), "good 1 2 3 4\nbad 1 2\n");
    try {
        load_pretrained(tmp.file("short.txt"), v, l, rng);
        FAIL("expected format_error");
    } catch (const format_error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(load_pretrained(tmp.file("absent.txt"), v, l, rng), io_error);

    RngStream r3(9);
    EmbeddingTable fresh = random_embeddings(v, l, r3, false);
    CHECK_FALSE(fresh.matrix.requires_grad());
    CHECK(fresh.matrix.at(Vocabulary::pad_id, 2) == 0.0);
}

TEST_CASE("encode") {
    Vocabulary v = Vocabulary::build({{"good", "stuff"}}, 1);
    TokenizedReview r = encode({"good"}, v, 10);
    CHECK(r.token_ids == std::vector<int>{v.id("good")});
    CHECK(r.n_tokens == 1);

    CHECK(encode({"zzz"}, v, 10).token_ids == std::vector<int>{Vocabulary::unk_id});

    std::vector<std::string> many(500, "good");
    TokenizedReview t = encode(many, v, 400);
    CHECK(t.token_ids.size() == 400);
    CHECK(t.n_tokens == 500);

    CHECK_THROWS_AS(encode({"good"}, v, 6), config_error);
}
