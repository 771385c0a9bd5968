#include "revhelp/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ctime>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "revhelp/util.hpp"

namespace revhelp {

using nlohmann::json;

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw shape_error("pearson: length mismatch, " + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()));
    if (a.size() < 2)
        throw contract_error("pearson: need at least two points");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0)
        throw undefined_correlation_error(
            "pearson: zero variance in " +
            std::string(va == 0.0 ? "first" : "second") + " argument");
    // sqrt of the product (not the product of sqrts) so that perfectly
    // correlated data lands on exactly ±1
    const double r = cov / std::sqrt(va * vb);
    return std::min(1.0, std::max(-1.0, r));
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t i, std::size_t k) { return x[i] < x[k]; });
    std::vector<double> ranks(x.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t k = i;
        while (k + 1 < idx.size() && x[idx[k + 1]] == x[idx[i]]) ++k;
        const double avg = (static_cast<double>(i) + static_cast<double>(k)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= k; ++t) ranks[idx[t]] = avg;
        i = k + 1;
    }
    return ranks;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw shape_error("spearman: length mismatch");
    if (a.size() < 2)
        throw contract_error("spearman: need at least two points");
    return pearson(average_ranks(a), average_ranks(b));
}

namespace {

CorrelationCell corr_cell(double (*f)(const std::vector<double>&,
                                      const std::vector<double>&),
                          const std::vector<double>& pred,
                          const std::vector<double>& gold) {
    CorrelationCell cell;
    try {
        cell.r = f(pred, gold);
        cell.defined = true;
    } catch (const undefined_correlation_error&) {
        cell.defined = false;
    }
    return cell;
}

CategoryResult score_group(const std::string& name, const std::vector<double>& pred,
                           const std::vector<double>& gold) {
    CategoryResult res;
    res.category = name;
    res.n = pred.size();
    if (pred.size() < 2) {
        res.skipped = true;
        return res;
    }
    res.pearson_r = corr_cell(&pearson, pred, gold);
    res.spearman_r = corr_cell(&spearman, pred, gold);
    return res;
}

std::string utc_now() {
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

EvalReport evaluate(const HelpfulnessModel& m,
                    const std::vector<LabeledExample>& examples,
                    const std::string& experiment_name,
                    std::uint64_t vocab_fingerprint) {
    if (examples.empty()) throw contract_error("evaluate: no examples");

    RngStream unused(0);  // inference never draws from it
    std::vector<double> all_pred, all_gold;
    all_pred.reserve(examples.size());
    all_gold.reserve(examples.size());
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (const auto& ex : examples) {
        const double p = clamp_score(predict(ex.tokens, m, false, unused));
        all_pred.push_back(p);
        all_gold.push_back(ex.score);
        groups[ex.category].first.push_back(p);
        groups[ex.category].second.push_back(ex.score);
    }

    EvalReport report;
    report.experiment_name = experiment_name;
    report.variant = m.config.variant;
    for (const auto& [cat, pg] : groups)
        report.per_category.push_back(score_group(cat, pg.first, pg.second));
    report.overall = score_group("overall", all_pred, all_gold);
    report.config_fingerprint = m.config.fingerprint(vocab_fingerprint);
    report.seed = m.config.seed;
    report.timestamp =
        m.config.run_timestamp.empty() ? utc_now() : m.config.run_timestamp;
    report.config_text = m.config.canonical_text();
    return report;
}

EvalReport cross_domain(const HelpfulnessModel& m,
                        const std::vector<LabeledExample>& annotated,
                        const std::string& train_category,
                        const std::string& eval_category,
                        std::uint64_t vocab_fingerprint) {
    std::vector<LabeledExample> subset;
    for (const auto& ex : annotated)
        if (ex.category == eval_category) subset.push_back(ex);
    if (subset.empty())
        throw config_error("cross-domain evaluation: annotated data has no category '" +
                           eval_category + "'");
    return evaluate(m, subset, "D1-" + train_category + " D2-" + eval_category,
                    vocab_fingerprint);
}

namespace {

json cell_to_json(const CorrelationCell& c) {
    json out;
    out["defined"] = c.defined;
    if (c.defined) out["r"] = c.r;
    else out["r"] = nullptr;
    return out;
}

CorrelationCell cell_from_json(const json& j) {
    CorrelationCell c;
    c.defined = j.at("defined").get<bool>();
    if (c.defined) c.r = j.at("r").get<double>();
    return c;
}

json category_to_json(const CategoryResult& r) {
    return json{{"category", r.category},
                {"n", r.n},
                {"skipped", r.skipped},
                {"pearson", cell_to_json(r.pearson_r)},
                {"spearman", cell_to_json(r.spearman_r)}};
}

CategoryResult category_from_json(const json& j) {
    CategoryResult r;
    r.category = j.at("category").get<std::string>();
    r.n = j.at("n").get<std::size_t>();
    r.skipped = j.at("skipped").get<bool>();
    r.pearson_r = cell_from_json(j.at("pearson"));
    r.spearman_r = cell_from_json(j.at("spearman"));
    return r;
}

}  // namespace

std::string report_to_json(const EvalReport& r) {
    json obj;
    obj["experiment_name"] = r.experiment_name;
    obj["variant"] = r.variant;
    json cats = json::array();
    for (const auto& c : r.per_category) cats.push_back(category_to_json(c));
    obj["per_category"] = cats;
    obj["overall"] = category_to_json(r.overall);
    obj["config_fingerprint"] = r.config_fingerprint;
    obj["seed"] = r.seed;
    obj["timestamp"] = r.timestamp;
    obj["config_text"] = r.config_text;
    return obj.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
    json obj = json::parse(text, nullptr, false);
    if (!obj.is_object()) throw format_error("report is not a JSON object");
    try {
        EvalReport r;
        r.experiment_name = obj.at("experiment_name").get<std::string>();
        r.variant = obj.at("variant").get<std::string>();
        for (const auto& c : obj.at("per_category"))
            r.per_category.push_back(category_from_json(c));
        r.overall = category_from_json(obj.at("overall"));
        r.config_fingerprint = obj.at("config_fingerprint").get<std::uint64_t>();
        r.seed = obj.at("seed").get<std::uint64_t>();
        r.timestamp = obj.at("timestamp").get<std::string>();
        r.config_text = obj.at("config_text").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw format_error(std::string("malformed report JSON: ") + e.what());
    }
}

namespace {

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string cell_text(const CategoryResult& r, bool spearman_col) {
    if (r.skipped) return "skipped";
    const CorrelationCell& c = spearman_col ? r.spearman_r : r.pearson_r;
    return c.defined ? fixed4(c.r) : "undef";
}

std::string pad_to(const std::string& s, std::size_t w) {
    return s + std::string(s.size() < w ? w - s.size() : 0, ' ');
}

}  // namespace

std::string render_report(const EvalReport& r) {
    std::vector<std::array<std::string, 4>> rows;
    rows.push_back({"category", "n", "pearson", "spearman"});
    auto add = [&](const CategoryResult& c) {
        rows.push_back({c.category, std::to_string(c.n), cell_text(c, false),
                        cell_text(c, true)});
    };
    for (const auto& c : r.per_category) add(c);
    add(r.overall);

    std::size_t w[4] = {0, 0, 0, 0};
    for (const auto& row : rows)
        for (int i = 0; i < 4; ++i) w[i] = std::max(w[i], row[i].size());

    std::ostringstream out;
    out << "experiment: " << r.experiment_name << "  variant: " << r.variant
        << "  seed: " << r.seed << "\n";
    for (const auto& row : rows) {
        for (int i = 0; i < 4; ++i)
            out << pad_to(row[i], w[i]) << (i == 3 ? "" : "  ");
        out << "\n";
    }
    return out.str();
}

ComparisonTable compare_variants(const std::vector<EvalReport>& reports) {
    if (reports.size() < 2)
        throw config_error("variant comparison needs at least two reports");

    // duplicate variant names get a #ordinal on every occurrence
    std::map<std::string, std::size_t> uses, numbered;
    for (const auto& rep : reports) ++uses[rep.variant];
    std::vector<std::string> labels;
    for (const auto& rep : reports) {
        std::string label = rep.variant;
        if (uses[label] > 1)
            label += "#" + std::to_string(++numbered[rep.variant]);
        labels.push_back(label);
    }

    // Rows: categories carried by at least two of the reports.
    std::map<std::string, std::size_t> seen;
    for (const auto& rep : reports)
        for (const auto& c : rep.per_category) ++seen[c.category];
    std::vector<std::string> cats;
    for (const auto& [cat, count] : seen)
        if (count >= 2) cats.push_back(cat);
    if (cats.empty())
        throw config_error("variant comparison: reports have no overlapping categories");

    auto find_cell = [](const EvalReport& rep,
                        const std::string& cat) -> const CategoryResult* {
        for (const auto& c : rep.per_category)
            if (c.category == cat) return &c;
        return nullptr;
    };

    std::vector<std::vector<std::string>> grid;  // rows x (1 + reports)
    grid.push_back({"category"});
    for (const auto& label : labels) grid[0].push_back(label);
    for (const auto& cat : cats) {
        std::vector<std::string> row{cat};
        double best = -2.0;
        for (const auto& rep : reports) {
            const CategoryResult* c = find_cell(rep, cat);
            if (c && !c->skipped && c->pearson_r.defined)
                best = std::max(best, c->pearson_r.r);
        }
        for (const auto& rep : reports) {
            const CategoryResult* c = find_cell(rep, cat);
            if (!c) row.push_back("");
            else if (c->skipped) row.push_back("skipped");
            else if (!c->pearson_r.defined) row.push_back("undef");
            else
                row.push_back(fixed4(c->pearson_r.r) +
                              (c->pearson_r.r == best ? "*" : ""));
        }
        grid.push_back(std::move(row));
    }

    auto csv_field = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string quoted = "\"";
        for (char ch : s) {
            if (ch == '"') quoted += "\"\"";
            else quoted += ch;
        }
        return quoted + "\"";
    };
    ComparisonTable table;
    for (const auto& row : grid) {
        for (std::size_t i = 0; i < row.size(); ++i)
            table.csv += (i ? "," : "") + csv_field(row[i]);
        table.csv += "\n";
    }
    std::vector<std::size_t> widths(grid[0].size(), 0);
    for (const auto& row : grid)
        for (std::size_t i = 0; i < row.size(); ++i)
            widths[i] = std::max(widths[i], row[i].size());
    for (const auto& row : grid) {
        for (std::size_t i = 0; i < row.size(); ++i)
            table.text += pad_to(row[i], widths[i]) + (i + 1 == row.size() ? "" : "  ");
        table.text += "\n";
    }
    return table;
}

}  // namespace revhelp
