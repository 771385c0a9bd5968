#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "revhelp/ingest.hpp"
#include "revhelp/model.hpp"

namespace revhelp {

// Sample Pearson correlation. Zero variance in either argument is an
// undefined-correlation error — never silently 0. Exactly symmetric in its
// arguments.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

struct CorrelationCell {
    bool defined = false;
    double r = 0.0;
};

struct CategoryResult {
    std::string category;
    std::size_t n = 0;
    bool skipped = false;  // fewer than 2 examples
    CorrelationCell pearson_r;
    CorrelationCell spearman_r;
};

struct EvalReport {
    std::string experiment_name;
    std::string variant;
    std::vector<CategoryResult> per_category;  // sorted by category name
    CategoryResult overall;
    std::uint64_t config_fingerprint = 0;
    std::uint64_t seed = 0;
    std::string timestamp;
    std::string config_text;
};

// Inference over every example (scores clamped to [0,1]), grouped by
// category. Categories with fewer than two examples are reported as skipped;
// zero-variance correlations are reported as undefined.
EvalReport evaluate(const HelpfulnessModel& m,
                    const std::vector<LabeledExample>& examples,
                    const std::string& experiment_name,
                    std::uint64_t vocab_fingerprint);

// Transfer protocol: model trained on one category, scored on another
// category of the annotated set. The report is labeled "D1-A D2-B".
EvalReport cross_domain(const HelpfulnessModel& m,
                        const std::vector<LabeledExample>& annotated,
                        const std::string& train_category,
                        const std::string& eval_category,
                        std::uint64_t vocab_fingerprint);

std::string report_to_json(const EvalReport& r);
EvalReport report_from_json(const std::string& text);

// Human-readable table of one report.
std::string render_report(const EvalReport& r);

struct ComparisonTable {
    std::string csv;
    std::string text;
};

// Side-by-side Pearson per category across several reports; the best defined
// value in each row is marked with '*'. Rows are the categories present in
// at least two reports.
ComparisonTable compare_variants(const std::vector<EvalReport>& reports);

}  // namespace revhelp
