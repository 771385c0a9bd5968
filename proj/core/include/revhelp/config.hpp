#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "revhelp/errors.hpp"

namespace revhelp {

// Every knob of a run. Flat key=value on disk; command-line flags of the same
// name override file values.
struct RunConfig {
    // paths
    std::string corpus;      // raw JSON-lines reviews
    std::string embeddings;  // pre-trained vector file, optional
    std::string annotated;   // human-scored CSV, optional
    std::string out = "out";
    std::string default_category = "unknown";

    // model
    std::size_t l = 100;  // embedding dimension
    std::size_t h = 2;    // attention heads
    double j = 1000.0;    // positional-encoding constant
    std::size_t c = 64;   // conv channels per filter width
    std::vector<std::size_t> filters = {1, 2, 3};
    double dropout = 0.5;
    std::size_t max_len = 400;
    std::string scale_dim = "d_k";     // attention score scaling: "d_k" or "l"
    std::string variant = "full_max";  // full_max | s_avg | s_attn
    bool train_embeddings = true;

    // training
    double learning_rate = 0.001;
    std::size_t batch_size = 32;
    std::size_t epochs = 10;
    std::uint64_t seed = 42;

    // data
    std::size_t vote_threshold = 5;  // admit reviews with Y >= this
    std::size_t min_words = 7;
    std::size_t min_count = 2;
    std::vector<double> split = {70, 20, 10};  // train/test/validation percent

    // reporting: fixed timestamp string for byte-stable outputs; empty means
    // "use the wall clock".
    std::string run_timestamp;

    void validate() const;

    // All keys, sorted, one key=value per line. Embedded in checkpoints and
    // reports.
    std::string canonical_text() const;

    // Only the keys that determine model compatibility (architecture +
    // tokenizer-facing limits), mixed with the vocabulary fingerprint.
    std::string identity_text() const;
    std::uint64_t fingerprint(std::uint64_t vocab_fingerprint) const;

    // Parses key=value lines ('#' comments and blank lines ignored). Unknown
    // keys or unparsable values are configuration errors naming the key.
    static RunConfig from_text(const std::string& text);
    static RunConfig from_file(const std::string& path);

    // Sets one key from its text form (shared by file parsing and flag
    // overrides).
    void set(const std::string& key, const std::string& value);
};

}  // namespace revhelp
