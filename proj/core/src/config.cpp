#include "revhelp/config.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "revhelp/util.hpp"

namespace revhelp {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw config_error("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw config_error("config key '" + key + "': expected a number, got '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw config_error("config key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<std::string> split_commas(const std::string& v) {
    std::vector<std::string> parts;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(trim(item));
    return parts;
}

template <typename T>
std::string join(const std::vector<T>& xs, std::string (*fmt)(T)) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ",";
        out += fmt(xs[i]);
    }
    return out;
}

std::string size_text(std::size_t v) { return std::to_string(v); }

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "corpus") corpus = value;
    else if (key == "embeddings") embeddings = value;
    else if (key == "annotated") annotated = value;
    else if (key == "out") out = value;
    else if (key == "default_category") default_category = value;
    else if (key == "run_timestamp") run_timestamp = value;
    else if (key == "scale_dim") scale_dim = value;
    else if (key == "variant") variant = value;
    else if (key == "l") l = parse_u64(key, value);
    else if (key == "h") h = parse_u64(key, value);
    else if (key == "c") c = parse_u64(key, value);
    else if (key == "max_len") max_len = parse_u64(key, value);
    else if (key == "batch_size") batch_size = parse_u64(key, value);
    else if (key == "epochs") epochs = parse_u64(key, value);
    else if (key == "min_words") min_words = parse_u64(key, value);
    else if (key == "min_count") min_count = parse_u64(key, value);
    else if (key == "vote_threshold") vote_threshold = parse_u64(key, value);
    else if (key == "seed") seed = parse_u64(key, value);
    else if (key == "j") j = parse_double(key, value);
    else if (key == "dropout") dropout = parse_double(key, value);
    else if (key == "learning_rate") learning_rate = parse_double(key, value);
    else if (key == "train_embeddings") train_embeddings = parse_bool(key, value);
    else if (key == "filters") {
        filters.clear();
        for (const auto& p : split_commas(value))
            filters.push_back(parse_u64(key, p));
    } else if (key == "split") {
        split.clear();
        for (const auto& p : split_commas(value))
            split.push_back(parse_double(key, p));
    } else {
        throw config_error("unknown config key '" + key + "'");
    }
}

void RunConfig::validate() const {
    if (l < 2 || l % 2 != 0)
        throw config_error("l must be even and at least 2, got " + std::to_string(l));
    if (h < 1) throw config_error("h must be at least 1");
    if (l % h != 0)
        throw config_error("l (" + std::to_string(l) + ") must be divisible by h (" +
                           std::to_string(h) + ")");
    const double two_pi = 2.0 * 3.14159265358979323846;
    if (j < two_pi || j > 10000.0)
        throw config_error("j must lie in [2*pi, 10000], got " + double_to_text(j));
    if (c < 1) throw config_error("c must be at least 1");
    if (filters.empty())
        throw config_error("filters must name at least one width");
    for (std::size_t i = 0; i < filters.size(); ++i) {
        if (filters[i] < 1 || filters[i] > 3)
            throw config_error("filter widths must come from {1,2,3}, got " +
                               std::to_string(filters[i]));
        if (i > 0 && filters[i] <= filters[i - 1])
            throw config_error("filter widths must be strictly increasing");
    }
    if (dropout < 0.0 || dropout >= 1.0)
        throw config_error("dropout must lie in [0, 1), got " + double_to_text(dropout));
    if (max_len < 7)
        throw config_error("max_len must be at least 7, got " + std::to_string(max_len));
    if (scale_dim != "d_k" && scale_dim != "l")
        throw config_error("scale_dim must be 'd_k' or 'l', got '" + scale_dim + "'");
    if (variant != "full_max" && variant != "s_avg" && variant != "s_attn")
        throw config_error("variant must be full_max, s_avg or s_attn, got '" +
                           variant + "'");
    if (learning_rate < 0.0)
        throw config_error("learning_rate must be non-negative");
    if (batch_size < 1) throw config_error("batch_size must be at least 1");
    if (min_words < 3)
        throw config_error("min_words must be at least 3 (largest filter width)");
    if (min_count < 1) throw config_error("min_count must be at least 1");
    if (split.size() != 3)
        throw config_error("split must have exactly three parts (train,test,validation)");
    for (double s : split)
        if (!(s > 0.0)) throw config_error("split parts must be positive");
}

std::string RunConfig::canonical_text() const {
    std::string t;
    t += "annotated=" + annotated + "\n";
    t += "batch_size=" + std::to_string(batch_size) + "\n";
    t += "c=" + std::to_string(c) + "\n";
    t += "corpus=" + corpus + "\n";
    t += "default_category=" + default_category + "\n";
    t += "dropout=" + double_to_text(dropout) + "\n";
    t += "embeddings=" + embeddings + "\n";
    t += "epochs=" + std::to_string(epochs) + "\n";
    t += "filters=" + join<std::size_t>(filters, size_text) + "\n";
    t += "h=" + std::to_string(h) + "\n";
    t += "j=" + double_to_text(j) + "\n";
    t += "l=" + std::to_string(l) + "\n";
    t += "learning_rate=" + double_to_text(learning_rate) + "\n";
    t += "max_len=" + std::to_string(max_len) + "\n";
    t += "min_count=" + std::to_string(min_count) + "\n";
    t += "min_words=" + std::to_string(min_words) + "\n";
    t += "out=" + out + "\n";
    t += "run_timestamp=" + run_timestamp + "\n";
    t += "scale_dim=" + scale_dim + "\n";
    t += "seed=" + std::to_string(seed) + "\n";
    t += "split=" + join<double>(split, double_to_text) + "\n";
    t += "train_embeddings=" + std::string(train_embeddings ? "true" : "false") + "\n";
    t += "variant=" + variant + "\n";
    t += "vote_threshold=" + std::to_string(vote_threshold) + "\n";
    return t;
}

std::string RunConfig::identity_text() const {
    std::string t;
    t += "c=" + std::to_string(c) + "\n";
    t += "dropout=" + double_to_text(dropout) + "\n";
    t += "filters=" + join<std::size_t>(filters, size_text) + "\n";
    t += "h=" + std::to_string(h) + "\n";
    t += "j=" + double_to_text(j) + "\n";
    t += "l=" + std::to_string(l) + "\n";
    t += "max_len=" + std::to_string(max_len) + "\n";
    t += "scale_dim=" + scale_dim + "\n";
    t += "train_embeddings=" + std::string(train_embeddings ? "true" : "false") + "\n";
    t += "variant=" + variant + "\n";
    return t;
}

std::uint64_t RunConfig::fingerprint(std::uint64_t vocab_fingerprint) const {
    std::uint64_t fp = fnv1a_64(fnv_offset_basis, identity_text());
    unsigned char bytes[8];
    std::memcpy(bytes, &vocab_fingerprint, 8);
    return fnv1a_64(fp, bytes, 8);
}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(line_no) +
                               " is not key=value: '" + s + "'");
        cfg.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

}  // namespace revhelp
