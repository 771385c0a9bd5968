#include "revhelp/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace revhelp {

namespace {

bool is_ascii_punct(unsigned char c) { return c < 128 && std::ispunct(c); }
bool is_ascii_space(unsigned char c) { return c < 128 && std::isspace(c); }

void emit_chunk(const std::string& chunk, std::vector<std::string>& out) {
    std::size_t a = 0, b = chunk.size();
    while (a < b && is_ascii_punct(chunk[a])) ++a;
    while (b > a && is_ascii_punct(chunk[b - 1])) --b;
    for (std::size_t i = 0; i < a; ++i) out.emplace_back(1, chunk[i]);
    if (a < b) out.push_back(chunk.substr(a, b - a));
    for (std::size_t i = b; i < chunk.size(); ++i) out.emplace_back(1, chunk[i]);
}

std::uint64_t fnv1a(std::uint64_t h, const void* bytes, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string chunk;
    for (char raw : text) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (is_ascii_space(c)) {
            if (!chunk.empty()) {
                emit_chunk(chunk, out);
                chunk.clear();
            }
        } else {
            chunk.push_back(static_cast<char>(c < 128 ? std::tolower(c) : c));
        }
    }
    if (!chunk.empty()) emit_chunk(chunk, out);
    return out;
}

Vocabulary::Vocabulary() {
    id_to_token_ = {pad_token, unk_token};
    token_to_id_ = {{pad_token, pad_id}, {unk_token, unk_id}};
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus,
                             std::size_t min_count) {
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& tokens : corpus)
        for (const auto& t : tokens) ++counts[t];
    return build_from_counts(counts, min_count);
}

Vocabulary Vocabulary::build_from_counts(
    const std::unordered_map<std::string, std::size_t>& counts,
    std::size_t min_count) {
    if (min_count < 1)
        throw config_error("build_vocab: min_count must be at least 1");
    std::vector<std::pair<std::string, std::size_t>> kept;
    kept.reserve(counts.size());
    for (const auto& [tok, n] : counts)
        if (n >= min_count) kept.emplace_back(tok, n);
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    Vocabulary v;
    for (const auto& [tok, n] : kept) {
        v.token_to_id_.emplace(tok, static_cast<int>(v.id_to_token_.size()));
        v.id_to_token_.push_back(tok);
    }
    return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& toks) {
    if (toks.size() < 2 || toks[0] != pad_token || toks[1] != unk_token)
        throw format_error("vocabulary list must start with the special tokens");
    Vocabulary v;
    for (std::size_t i = 2; i < toks.size(); ++i) {
        if (toks[i].empty() || v.token_to_id_.count(toks[i]))
            throw format_error("vocabulary list has an empty or duplicate token at id " +
                               std::to_string(i));
        v.token_to_id_.emplace(toks[i], static_cast<int>(v.id_to_token_.size()));
        v.id_to_token_.push_back(toks[i]);
    }
    return v;
}

int Vocabulary::id(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? unk_id : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
    return token_to_id_.count(token) != 0;
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
        throw contract_error("vocabulary: id " + std::to_string(id) + " out of range");
    return id_to_token_[static_cast<std::size_t>(id)];
}

std::uint64_t Vocabulary::fingerprint() const {
    std::uint64_t h = 14695981039346656037ull;
    for (const auto& tok : id_to_token_) {
        h = fnv1a(h, tok.data(), tok.size());
        h = fnv1a(h, "\n", 1);
    }
    return h;
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write vocabulary file: " + path);
    for (const auto& tok : id_to_token_) out << tok << '\n';
    if (!out) throw io_error("short write on vocabulary file: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read vocabulary file: " + path);
    Vocabulary v;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (row < 2) {
            const std::string expected = row == 0 ? pad_token : unk_token;
            if (line != expected)
                throw format_error("vocabulary file " + path + ": line " +
                                   std::to_string(row + 1) + " must be " + expected);
        } else {
            if (line.empty() || v.token_to_id_.count(line))
                throw format_error("vocabulary file " + path +
                                   ": empty or duplicate token at line " +
                                   std::to_string(row + 1));
            v.token_to_id_.emplace(line, static_cast<int>(v.id_to_token_.size()));
            v.id_to_token_.push_back(line);
        }
        ++row;
    }
    if (row < 2)
        throw format_error("vocabulary file " + path + ": missing special tokens");
    return v;
}

namespace {

Tensor uniform_rows(std::size_t v, std::size_t l, RngStream& rng) {
    return Tensor::uniform({v, l}, -0.05, 0.05, rng);
}

}  // namespace

EmbeddingTable load_pretrained(const std::string& path, const Vocabulary& vocab,
                               std::size_t l, RngStream& rng, bool trainable) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read embedding file: " + path);

    Tensor matrix = uniform_rows(vocab.size(), l, rng);
    std::vector<double> unk_mean(l, 0.0);
    std::size_t copied = 0;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string token;
        ss >> token;
        std::vector<double> vec;
        vec.reserve(l);
        double x;
        while (ss >> x) vec.push_back(x);
        if (vec.size() != l)
            throw format_error("embedding file " + path + ": line " +
                               std::to_string(line_no) + " has " +
                               std::to_string(vec.size()) + " values, expected " +
                               std::to_string(l));
        if (!vocab.contains(token)) continue;
        const int id = vocab.id(token);
        if (id == Vocabulary::unk_id || id == Vocabulary::pad_id) continue;
        std::copy(vec.begin(), vec.end(),
                  matrix.data().begin() + static_cast<std::size_t>(id) * l);
        for (std::size_t i = 0; i < l; ++i) unk_mean[i] += vec[i];
        ++copied;
    }

    if (copied > 0)
        for (std::size_t i = 0; i < l; ++i)
            matrix.data()[Vocabulary::unk_id * l + i] =
                unk_mean[i] / static_cast<double>(copied);
    std::fill_n(matrix.data().begin() + Vocabulary::pad_id * l, l, 0.0);

    matrix.set_requires_grad(trainable);
    return EmbeddingTable{matrix, trainable};
}

EmbeddingTable random_embeddings(const Vocabulary& vocab, std::size_t l,
                                 RngStream& rng, bool trainable) {
    Tensor matrix = uniform_rows(vocab.size(), l, rng);
    std::fill_n(matrix.data().begin() + Vocabulary::pad_id * l, l, 0.0);
    matrix.set_requires_grad(trainable);
    return EmbeddingTable{matrix, trainable};
}

TokenizedReview encode(const std::vector<std::string>& tokens,
                       const Vocabulary& vocab, std::size_t max_len) {
    if (max_len < 7)
        throw config_error("encode: max_len must be at least 7, got " +
                           std::to_string(max_len));
    TokenizedReview r;
    r.n_tokens = tokens.size();
    const std::size_t keep = std::min(tokens.size(), max_len);
    r.token_ids.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) r.token_ids.push_back(vocab.id(tokens[i]));
    return r;
}

}  // namespace revhelp
