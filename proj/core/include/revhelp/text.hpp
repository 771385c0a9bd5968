#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "revhelp/rng.hpp"
#include "revhelp/tensor.hpp"

namespace revhelp {

// Lowercases (ASCII), splits on whitespace, and peels leading/trailing ASCII
// punctuation off each chunk into separate tokens, preserving order. Bytes
// outside ASCII pass through untouched, so UTF-8 content survives intact.
std::vector<std::string> tokenize(const std::string& text);

class Vocabulary {
public:
    static constexpr int pad_id = 0;
    static constexpr int unk_id = 1;
    static constexpr const char* pad_token = "<pad>";
    static constexpr const char* unk_token = "<unk>";

    // Specials only.
    Vocabulary();

    // Tokens with frequency >= min_count, ordered by descending frequency
    // then lexicographically, ids starting after the specials.
    static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                            std::size_t min_count);
    static Vocabulary build_from_counts(
        const std::unordered_map<std::string, std::size_t>& counts,
        std::size_t min_count);

    // Rebuilds from an id-ordered token list (first two entries must be the
    // specials); the inverse of tokens().
    static Vocabulary from_tokens(const std::vector<std::string>& toks);

    int id(const std::string& token) const;  // unk_id on a miss
    bool contains(const std::string& token) const;
    const std::string& token(int id) const;
    std::size_t size() const { return id_to_token_.size(); }

    // FNV-1a over the id-ordered token list; ties vocab to checkpoints.
    std::uint64_t fingerprint() const;

    const std::vector<std::string>& tokens() const { return id_to_token_; }

    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);

private:
    std::unordered_map<std::string, int> token_to_id_;
    std::vector<std::string> id_to_token_;
};

struct EmbeddingTable {
    Tensor matrix;  // [V×l], requires_grad tracks trainable
    bool trainable = true;
};

// Reads a pre-trained vector file (one line per token: the token then exactly
// l decimal floats). Every row starts uniform in [-0.05, 0.05] from rng, rows
// found in the file are overwritten, UNK becomes the mean of the copied rows,
// and PAD is zeroed.
EmbeddingTable load_pretrained(const std::string& path, const Vocabulary& vocab,
                               std::size_t l, RngStream& rng, bool trainable = true);

// Same initialization without a file: uniform rows, zero PAD.
EmbeddingTable random_embeddings(const Vocabulary& vocab, std::size_t l,
                                 RngStream& rng, bool trainable = true);

struct TokenizedReview {
    std::vector<int> token_ids;
    std::size_t n_tokens = 0;  // word count before truncation
};

TokenizedReview encode(const std::vector<std::string>& tokens,
                       const Vocabulary& vocab, std::size_t max_len);

}  // namespace revhelp
