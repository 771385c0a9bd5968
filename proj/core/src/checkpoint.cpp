#include "revhelp/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "revhelp/util.hpp"

namespace revhelp {

namespace {

constexpr char magic[4] = {'R', 'V', 'H', 'C'};
constexpr std::uint32_t version = 1;

void put_u32(std::string& buf, std::uint32_t v) {
    char b[4];
    std::memcpy(b, &v, 4);
    buf.append(b, 4);
}

void put_u64(std::string& buf, std::uint64_t v) {
    char b[8];
    std::memcpy(b, &v, 8);
    buf.append(b, 8);
}

void put_str(std::string& buf, const std::string& s) {
    put_u32(buf, static_cast<std::uint32_t>(s.size()));
    buf.append(s);
}

struct Cursor {
    const std::string& buf;
    std::size_t pos = 0;
    const std::string& path;

    void need(std::size_t n) const {
        if (pos + n > buf.size())
            throw format_error("checkpoint " + path + " is truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v;
        std::memcpy(&v, buf.data() + pos, 4);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v;
        std::memcpy(&v, buf.data() + pos, 8);
        pos += 8;
        return v;
    }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
};

}  // namespace

void save_checkpoint(const std::string& path, const HelpfulnessModel& m,
                     const Vocabulary& vocab) {
    std::string payload;
    put_str(payload, m.config.canonical_text());

    put_u64(payload, vocab.size());
    for (const auto& tok : vocab.tokens()) put_str(payload, tok);

    const auto params = m.named_parameters();
    put_u64(payload, params.size());
    for (const auto& [name, t] : params) {
        put_str(payload, name);
        put_u32(payload, static_cast<std::uint32_t>(t.rank()));
        for (std::size_t d : t.shape()) put_u64(payload, d);
        const char* raw = reinterpret_cast<const char*>(t.data().data());
        payload.append(raw, t.numel() * sizeof(double));
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write checkpoint file: " + path);
    out.write(magic, 4);
    std::uint32_t ver = version;
    out.write(reinterpret_cast<const char*>(&ver), 4);
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    const std::uint64_t checksum = fnv1a_64(fnv_offset_basis, payload);
    out.write(reinterpret_cast<const char*>(&checksum), 8);
    if (!out) throw io_error("short write on checkpoint file: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read checkpoint file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    if (bytes.size() < 16 || std::memcmp(bytes.data(), magic, 4) != 0)
        throw format_error("checkpoint " + path + " is not a model archive");
    std::uint32_t ver;
    std::memcpy(&ver, bytes.data() + 4, 4);
    if (ver != version)
        throw format_error("checkpoint " + path + " has unsupported version " +
                           std::to_string(ver));

    const std::string payload = bytes.substr(8, bytes.size() - 16);
    std::uint64_t stored;
    std::memcpy(&stored, bytes.data() + bytes.size() - 8, 8);
    if (stored != fnv1a_64(fnv_offset_basis, payload))
        throw format_error("checkpoint " + path + " failed its checksum");

    Cursor cur{payload, 0, path};
    RunConfig cfg = RunConfig::from_text(cur.str());
    cfg.validate();

    const std::uint64_t vocab_count = cur.u64();
    std::vector<std::string> toks;
    toks.reserve(vocab_count);
    for (std::uint64_t i = 0; i < vocab_count; ++i) toks.push_back(cur.str());
    Vocabulary vocab = Vocabulary::from_tokens(toks);

    RngStream init_rng(cfg.seed);
    EmbeddingTable emb =
        random_embeddings(vocab, cfg.l, init_rng, cfg.train_embeddings);
    HelpfulnessModel model = make_model(cfg, std::move(emb), init_rng);

    auto params = model.named_parameters();
    const std::uint64_t param_count = cur.u64();
    if (param_count != params.size())
        throw format_error("checkpoint " + path + " holds " +
                           std::to_string(param_count) + " tensors, expected " +
                           std::to_string(params.size()));
    for (std::uint64_t i = 0; i < param_count; ++i) {
        const std::string name = cur.str();
        if (name != params[i].first)
            throw format_error("checkpoint " + path + ": tensor '" + name +
                               "' where '" + params[i].first + "' was expected");
        const std::uint32_t rank = cur.u32();
        std::vector<std::size_t> shape;
        for (std::uint32_t d = 0; d < rank; ++d)
            shape.push_back(static_cast<std::size_t>(cur.u64()));
        Tensor t = params[i].second;
        if (shape != t.shape())
            throw format_error("checkpoint " + path + ": tensor '" + name +
                               "' has an unexpected shape");
        cur.need(t.numel() * sizeof(double));
        std::memcpy(t.data().data(), payload.data() + cur.pos,
                    t.numel() * sizeof(double));
        cur.pos += t.numel() * sizeof(double);
    }
    if (cur.pos != payload.size())
        throw format_error("checkpoint " + path + " has trailing bytes");
    return LoadedCheckpoint{std::move(model), std::move(vocab)};
}

}  // namespace revhelp
