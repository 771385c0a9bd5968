#include "revhelp/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "revhelp/rng.hpp"
#include "revhelp/util.hpp"

namespace revhelp {

using nlohmann::json;

ReviewReader::ReviewReader(const std::string& path, std::string default_category)
    : in_(path, std::ios::binary),
      path_(path),
      default_category_(std::move(default_category)) {
    if (!in_) throw io_error("cannot read corpus file: " + path);
}

namespace {

// A line is usable when it parses as JSON and carries text, a well-formed
// helpful-votes pair and an id.
std::optional<RawReview> parse_line(const std::string& line,
                                    const std::string& default_category) {
    json obj = json::parse(line, nullptr, false);
    if (!obj.is_object()) return std::nullopt;

    RawReview r;
    if (obj.contains("reviewText") && obj["reviewText"].is_string())
        r.text = obj["reviewText"].get<std::string>();
    else if (obj.contains("text") && obj["text"].is_string())
        r.text = obj["text"].get<std::string>();
    else
        return std::nullopt;

    const auto& votes = obj.contains("helpful") ? obj["helpful"] : json();
    if (!votes.is_array() || votes.size() != 2 || !votes[0].is_number_integer() ||
        !votes[1].is_number_integer() || votes[0].get<std::int64_t>() < 0 ||
        votes[1].get<std::int64_t>() < 0)
        return std::nullopt;
    r.helpful_x = votes[0].get<std::size_t>();
    r.helpful_y = votes[1].get<std::size_t>();
    if (r.helpful_x > r.helpful_y) return std::nullopt;

    if (obj.contains("review_id") && obj["review_id"].is_string())
        r.review_id = obj["review_id"].get<std::string>();
    else if (obj.contains("reviewerID") && obj["reviewerID"].is_string() &&
             obj.contains("asin") && obj["asin"].is_string())
        r.review_id = obj["reviewerID"].get<std::string>() + "-" +
                      obj["asin"].get<std::string>();
    if (r.review_id.empty()) return std::nullopt;

    if (obj.contains("category") && obj["category"].is_string())
        r.category = obj["category"].get<std::string>();
    else
        r.category = default_category;
    return r;
}

}  // namespace

std::optional<RawReview> ReviewReader::next() {
    if (done_) return std::nullopt;
    std::string line;
    while (std::getline(in_, line)) {
        if (line.empty()) continue;
        ++total_lines_;
        auto parsed = parse_line(line, default_category_);
        if (parsed) return parsed;
        ++malformed_;
    }
    done_ = true;
    if (total_lines_ > 0 && malformed_ * 10 > total_lines_)
        throw format_error("corpus " + path_ + ": " + std::to_string(malformed_) +
                           " of " + std::to_string(total_lines_) +
                           " lines malformed (over 10%)");
    return std::nullopt;
}

double label(const RawReview& raw) {
    if (raw.helpful_y == 0)
        throw undefined_label_error("review " + raw.review_id +
                                    " has no votes, score X/Y undefined");
    return static_cast<double>(raw.helpful_x) / static_cast<double>(raw.helpful_y);
}

bool admit(const RawReview& raw, std::size_t token_count, std::size_t vote_threshold,
           std::size_t min_words) {
    return raw.helpful_y >= std::max<std::size_t>(vote_threshold, 1) &&
           token_count >= min_words;
}

DatasetSplit split_examples(std::vector<LabeledExample> examples, std::uint64_t seed,
                            const std::vector<double>& proportions) {
    if (examples.size() < 10)
        throw config_error("split needs at least 10 examples, got " +
                           std::to_string(examples.size()));
    if (proportions.size() != 3)
        throw config_error("split needs exactly three proportions");
    double total = 0.0;
    for (double p : proportions) {
        if (!(p > 0.0)) throw config_error("split proportions must be positive");
        total += p;
    }

    RngStream rng(seed);
    rng.shuffle(examples);

    // Largest-remainder rounding; leftover units go to the buckets with the
    // biggest fractional parts, ties resolved in train/test/validation order.
    const std::size_t n = examples.size();
    std::size_t sizes[3];
    double fracs[3];
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double exact = static_cast<double>(n) * proportions[i] / total;
        sizes[i] = static_cast<std::size_t>(exact);
        fracs[i] = exact - static_cast<double>(sizes[i]);
        assigned += sizes[i];
    }
    std::size_t leftover = n - assigned;
    int order[3] = {0, 1, 2};
    std::stable_sort(order, order + 3, [&](int a, int b) { return fracs[a] > fracs[b]; });
    for (std::size_t i = 0; i < leftover; ++i) ++sizes[order[i % 3]];

    DatasetSplit out;
    out.seed = seed;
    auto it = examples.begin();
    out.train.assign(it, it + sizes[0]);
    it += sizes[0];
    out.test.assign(it, it + sizes[1]);
    it += sizes[1];
    out.validation.assign(it, it + sizes[2]);
    return out;
}

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& content,
                                                const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_started = false;
    for (std::size_t i = 0; i < content.size(); ++i) {
        const char ch = content[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
            case '"':
                in_quotes = true;
                row_started = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                row_started = true;
                break;
            case '\r':
                break;
            case '\n':
                if (row_started || !field.empty()) {
                    row.push_back(std::move(field));
                    field.clear();
                    rows.push_back(std::move(row));
                    row.clear();
                    row_started = false;
                }
                break;
            default:
                field.push_back(ch);
                row_started = true;
        }
    }
    if (in_quotes)
        throw format_error("annotated file " + path + ": unterminated quote");
    if (row_started || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::vector<LabeledExample> load_annotated(const std::string& path,
                                           const Vocabulary& vocab,
                                           std::size_t max_len,
                                           std::size_t min_words) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read annotated file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    auto rows = parse_csv(buf.str(), path);
    if (rows.empty())
        return {};
    const std::vector<std::string> header{"review_id", "category", "score", "text"};
    if (rows[0] != header)
        throw format_error("annotated file " + path +
                           ": header must be review_id,category,score,text");

    std::vector<LabeledExample> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 4)
            throw format_error("annotated file " + path + ": row " +
                               std::to_string(r + 1) + " has " +
                               std::to_string(row.size()) + " fields, expected 4");
        double score = 0.0;
        auto res = std::from_chars(row[2].data(), row[2].data() + row[2].size(), score);
        if (res.ec != std::errc{} || res.ptr != row[2].data() + row[2].size() ||
            !(score >= 0.0 && score <= 1.0))
            throw format_error("annotated file " + path + ": row " +
                               std::to_string(r + 1) + " score '" + row[2] +
                               "' is not in [0, 1]");
        auto tokens = tokenize(row[3]);
        if (tokens.size() < min_words) continue;
        LabeledExample ex;
        ex.review_id = row[0];
        ex.category = row[1];
        ex.score = score;
        ex.source = "D2";
        ex.tokens = encode(tokens, vocab, max_len);
        out.push_back(std::move(ex));
    }
    return out;
}

void write_dataset(const std::string& path,
                   const std::vector<LabeledExample>& examples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write dataset file: " + path);
    for (const auto& ex : examples) {
        json obj{{"review_id", ex.review_id},
                 {"category", ex.category},
                 {"score", ex.score},
                 {"source", ex.source},
                 {"n_tokens", ex.tokens.n_tokens},
                 {"token_ids", ex.tokens.token_ids}};
        out << obj.dump() << '\n';
    }
    if (!out) throw io_error("short write on dataset file: " + path);
}

std::vector<LabeledExample> read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read dataset file: " + path);
    std::vector<LabeledExample> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj = json::parse(line, nullptr, false);
        if (!obj.is_object())
            throw format_error("dataset " + path + ": line " +
                               std::to_string(line_no) + " is not a JSON object");
        try {
            LabeledExample ex;
            ex.review_id = obj.at("review_id").get<std::string>();
            ex.category = obj.at("category").get<std::string>();
            ex.score = obj.at("score").get<double>();
            ex.source = obj.at("source").get<std::string>();
            ex.tokens.n_tokens = obj.at("n_tokens").get<std::size_t>();
            ex.tokens.token_ids = obj.at("token_ids").get<std::vector<int>>();
            out.push_back(std::move(ex));
        } catch (const json::exception& e) {
            throw format_error("dataset " + path + ": line " + std::to_string(line_no) +
                               ": " + e.what());
        }
    }
    return out;
}

void write_manifest(const std::string& path, const IngestManifest& m) {
    json obj{{"total_lines", m.total_lines},
             {"malformed", m.malformed},
             {"duplicates", m.duplicates},
             {"rejected_votes", m.rejected_votes},
             {"rejected_length", m.rejected_length},
             {"admitted", m.admitted},
             {"admitted_per_category", m.admitted_per_category},
             {"n_train", m.n_train},
             {"n_test", m.n_test},
             {"n_validation", m.n_validation},
             {"vocab_size", m.vocab_size},
             {"vocab_fingerprint", m.vocab_fingerprint},
             {"config_fingerprint", m.config_fingerprint},
             {"config_text", m.config_text}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write manifest file: " + path);
    out << obj.dump(2) << '\n';
    if (!out) throw io_error("short write on manifest file: " + path);
}

IngestManifest read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read manifest file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    json obj = json::parse(buf.str(), nullptr, false);
    if (!obj.is_object()) throw format_error("manifest " + path + " is not JSON");
    try {
        IngestManifest m;
        m.total_lines = obj.at("total_lines").get<std::size_t>();
        m.malformed = obj.at("malformed").get<std::size_t>();
        m.duplicates = obj.at("duplicates").get<std::size_t>();
        m.rejected_votes = obj.at("rejected_votes").get<std::size_t>();
        m.rejected_length = obj.at("rejected_length").get<std::size_t>();
        m.admitted = obj.at("admitted").get<std::size_t>();
        m.admitted_per_category =
            obj.at("admitted_per_category").get<std::map<std::string, std::size_t>>();
        m.n_train = obj.at("n_train").get<std::size_t>();
        m.n_test = obj.at("n_test").get<std::size_t>();
        m.n_validation = obj.at("n_validation").get<std::size_t>();
        m.vocab_size = obj.at("vocab_size").get<std::size_t>();
        m.vocab_fingerprint = obj.at("vocab_fingerprint").get<std::uint64_t>();
        m.config_fingerprint = obj.at("config_fingerprint").get<std::uint64_t>();
        m.config_text = obj.at("config_text").get<std::string>();
        return m;
    } catch (const json::exception& e) {
        throw format_error("manifest " + path + ": " + e.what());
    }
}

}  // namespace revhelp
