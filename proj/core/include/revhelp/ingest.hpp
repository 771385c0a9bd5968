#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "revhelp/config.hpp"
#include "revhelp/text.hpp"

namespace revhelp {

struct RawReview {
    std::string review_id;
    std::string text;
    std::size_t helpful_x = 0;  // users who voted helpful
    std::size_t helpful_y = 0;  // users who voted at all
    std::string category;
};

// Streams a JSON-lines corpus without materializing it. Lines that fail to
// parse or miss required fields are counted and skipped; when the stream is
// exhausted, more than 10% malformed lines is reported as a corpus-format
// error.
class ReviewReader {
public:
    ReviewReader(const std::string& path, std::string default_category);

    std::optional<RawReview> next();

    std::size_t total_lines() const { return total_lines_; }
    std::size_t malformed() const { return malformed_; }

private:
    std::ifstream in_;
    std::string path_;
    std::string default_category_;
    std::size_t total_lines_ = 0;
    std::size_t malformed_ = 0;
    bool done_ = false;
};

// X/Y helpfulness score. Y = 0 has no defined label.
double label(const RawReview& raw);

// The corpus admission rule: enough votes and enough words.
bool admit(const RawReview& raw, std::size_t token_count, std::size_t vote_threshold,
           std::size_t min_words);

struct LabeledExample {
    std::string review_id;
    TokenizedReview tokens;
    double score = 0.0;
    std::string category;
    std::string source;  // "D1" or "D2"
};

struct DatasetSplit {
    std::vector<LabeledExample> train, test, validation;
    std::uint64_t seed = 0;
};

// Seeded shuffle then contiguous partition (train, test, validation) with
// largest-remainder rounding of the proportions.
DatasetSplit split_examples(std::vector<LabeledExample> examples, std::uint64_t seed,
                            const std::vector<double>& proportions);

// Human-annotated CSV (header: review_id, category, score, text; RFC-4180
// quoting). Every row becomes a D2 example; no vote filter, but reviews under
// min_words tokens are still dropped.
std::vector<LabeledExample> load_annotated(const std::string& path,
                                           const Vocabulary& vocab,
                                           std::size_t max_len,
                                           std::size_t min_words);

void write_dataset(const std::string& path,
                   const std::vector<LabeledExample>& examples);
std::vector<LabeledExample> read_dataset(const std::string& path);

struct IngestManifest {
    std::size_t total_lines = 0;
    std::size_t malformed = 0;
    std::size_t duplicates = 0;
    std::size_t rejected_votes = 0;
    std::size_t rejected_length = 0;
    std::size_t admitted = 0;
    std::map<std::string, std::size_t> admitted_per_category;
    std::size_t n_train = 0, n_test = 0, n_validation = 0;
    std::size_t vocab_size = 0;
    std::uint64_t vocab_fingerprint = 0;
    std::uint64_t config_fingerprint = 0;
    std::string config_text;
};

void write_manifest(const std::string& path, const IngestManifest& m);
IngestManifest read_manifest(const std::string& path);

}  // namespace revhelp
