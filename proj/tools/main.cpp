#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "revhelp/checkpoint.hpp"
#include "revhelp/eval.hpp"
#include "revhelp/gradcheck.hpp"
#include "revhelp/ingest.hpp"
#include "revhelp/trainer.hpp"

namespace fs = std::filesystem;
using namespace revhelp;

namespace {

// ---------------------------------------------------------------------------
// paths: relative paths resolve against $REVHELP_DATA_DIR when it is set

std::string data_root() {
    const char* env = std::getenv("REVHELP_DATA_DIR");
    return env ? std::string(env) : std::string();
}

std::string resolve_path(const std::string& p) {
    if (p.empty()) return p;
    fs::path q(p);
    const std::string root = data_root();
    if (q.is_absolute() || root.empty()) return p;
    return (fs::path(root) / q).string();
}

// ---------------------------------------------------------------------------
// config wiring: one --flag per config key, flags override the file

const char* key_description(const std::string& key) {
    static const std::map<std::string, const char*> docs = {
        {"annotated", "human-scored CSV (review_id,category,score,text)"},
        {"batch_size", "training batch size"},
        {"c", "convolution channels per filter width"},
        {"corpus", "JSON-lines review corpus"},
        {"default_category", "category assigned to reviews that carry none"},
        {"dropout", "dropout rate before the regression head"},
        {"embeddings", "pre-trained embedding text file (token + l floats)"},
        {"epochs", "training epochs"},
        {"filters", "comma-separated filter widths, subset of 1,2,3"},
        {"h", "attention heads"},
        {"j", "positional-encoding base constant"},
        {"l", "embedding dimension"},
        {"learning_rate", "Adam learning rate"},
        {"max_len", "reviews truncated to this many tokens"},
        {"min_count", "vocabulary frequency cutoff"},
        {"min_words", "admission: minimum tokens per review"},
        {"out", "directory for datasets, checkpoints and reports"},
        {"run_timestamp", "fixed ISO-8601 timestamp for byte-stable reports"},
        {"scale_dim", "attention score scaling: d_k or l"},
        {"seed", "seed for every random choice"},
        {"split", "train/test/validation percentages"},
        {"train_embeddings", "update embeddings during training"},
        {"variant", "full_max, s_avg or s_attn"},
        {"vote_threshold", "admission: minimum total votes"},
    };
    auto it = docs.find(key);
    return it == docs.end() ? "" : it->second;
}

std::vector<std::string> config_key_names() {
    std::vector<std::string> keys;
    std::istringstream lines(RunConfig().canonical_text());
    std::string line;
    while (std::getline(lines, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto end = line.find_last_not_of(' ', eq - 1);
        keys.push_back(line.substr(0, end + 1));
    }
    return keys;
}

std::vector<std::string> keys_in_config_file(const std::string& path) {
    std::ifstream in(path);
    std::vector<std::string> keys;
    std::string line;
    while (std::getline(in, line)) {
        const auto start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const auto end = line.find_last_not_of(" \t", eq - 1);
        keys.push_back(line.substr(start, end - start + 1));
    }
    return keys;
}

// Collects --config plus per-key override flags on one subcommand and
// assembles the effective RunConfig (defaults, then file, then flags).
struct ConfigCli {
    CLI::App* cmd = nullptr;
    std::string config_path;
    std::map<std::string, std::string> overrides;

    void attach(CLI::App* sub) {
        cmd = sub;
        // long-only help so the config key h can keep its natural flag
        sub->set_help_flag("--help", "print this help message and exit");
        sub->add_option("--config", config_path,
                        "key=value config file (flags override it)");
        for (const auto& key : config_key_names())
            sub->add_option("--" + key, overrides[key], key_description(key));
    }

    // keys the user actually set, via file or flag
    std::set<std::string> explicit_keys;

    RunConfig assemble() {
        RunConfig cfg;
        if (cmd->count("--config")) {
            const std::string path = resolve_path(config_path);
            cfg = RunConfig::from_file(path);
            for (const auto& k : keys_in_config_file(path))
                explicit_keys.insert(k);
        }
        for (auto& [key, value] : overrides)
            if (cmd->count("--" + key)) {
                cfg.set(key, value);
                explicit_keys.insert(key);
            }
        cfg.corpus = resolve_path(cfg.corpus);
        cfg.embeddings = resolve_path(cfg.embeddings);
        cfg.annotated = resolve_path(cfg.annotated);
        cfg.out = resolve_path(cfg.out);
        return cfg;
    }
};

std::map<std::string, std::string> config_values(const RunConfig& cfg) {
    std::map<std::string, std::string> m;
    std::istringstream lines(cfg.canonical_text());
    std::string line;
    while (std::getline(lines, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        m[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return m;
}

// ---------------------------------------------------------------------------
// ingest

int cmd_ingest(RunConfig cfg) {
    if (cfg.corpus.empty())
        throw config_error("ingest: no corpus configured; pass --corpus or set "
                           "corpus= in the config file");
    cfg.validate();

    struct Pending {
        RawReview raw;
        std::vector<std::string> tokens;
        double score = 0.0;
    };
    std::vector<Pending> kept;
    std::set<std::string> seen_ids;
    IngestManifest man;

    const std::size_t min_votes = std::max<std::size_t>(cfg.vote_threshold, 1);
    ReviewReader reader(cfg.corpus, cfg.default_category);
    while (auto raw = reader.next()) {
        if (!seen_ids.insert(raw->review_id).second) {
            ++man.duplicates;
            continue;
        }
        if (raw->helpful_y < min_votes) {
            ++man.rejected_votes;
            continue;
        }
        std::vector<std::string> tokens = tokenize(raw->text);
        if (tokens.size() < cfg.min_words) {
            ++man.rejected_length;
            continue;
        }
        const double score = label(*raw);
        kept.push_back({std::move(*raw), std::move(tokens), score});
    }
    man.total_lines = reader.total_lines();
    man.malformed = reader.malformed();
    man.admitted = kept.size();

    std::vector<std::vector<std::string>> token_lists;
    token_lists.reserve(kept.size());
    for (const auto& p : kept) token_lists.push_back(p.tokens);
    Vocabulary vocab = Vocabulary::build(token_lists, cfg.min_count);

    std::vector<LabeledExample> examples;
    examples.reserve(kept.size());
    for (const auto& p : kept) {
        LabeledExample e;
        e.review_id = p.raw.review_id;
        e.tokens = encode(p.tokens, vocab, cfg.max_len);
        e.score = p.score;
        e.category = p.raw.category;
        e.source = "D1";
        ++man.admitted_per_category[e.category];
        examples.push_back(std::move(e));
    }

    const double total = cfg.split[0] + cfg.split[1] + cfg.split[2];
    DatasetSplit split = split_examples(
        std::move(examples), cfg.seed,
        {cfg.split[0] / total, cfg.split[1] / total, cfg.split[2] / total});
    man.n_train = split.train.size();
    man.n_test = split.test.size();
    man.n_validation = split.validation.size();
    man.vocab_size = vocab.size();
    man.vocab_fingerprint = vocab.fingerprint();
    man.config_fingerprint = cfg.fingerprint(vocab.fingerprint());
    man.config_text = cfg.canonical_text();

    fs::create_directories(cfg.out);
    const fs::path out(cfg.out);
    write_dataset((out / "dataset_train.jsonl").string(), split.train);
    write_dataset((out / "dataset_test.jsonl").string(), split.test);
    write_dataset((out / "dataset_validation.jsonl").string(), split.validation);
    vocab.save((out / "vocab.txt").string());
    write_manifest((out / "manifest.json").string(), man);

    std::cout << "read " << man.total_lines << " lines (" << man.malformed
              << " malformed, " << man.duplicates << " duplicate ids)\n"
              << "rejected " << man.rejected_votes << " for votes, "
              << man.rejected_length << " for length\n"
              << "admitted " << man.admitted << ":\n";
    for (const auto& [category, count] : man.admitted_per_category)
        std::cout << "  " << category << ": " << count << "\n";
    std::cout << "split " << man.n_train << " train / " << man.n_test
              << " test / " << man.n_validation << " validation, vocabulary "
              << man.vocab_size << " tokens\n"
              << "wrote " << out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(RunConfig cfg) {
    cfg.validate();
    const fs::path out(cfg.out);
    Vocabulary vocab = Vocabulary::load((out / "vocab.txt").string());
    auto train = read_dataset((out / "dataset_train.jsonl").string());
    auto validation = read_dataset((out / "dataset_validation.jsonl").string());

    RngStream rng(cfg.seed);
    EmbeddingTable emb =
        cfg.embeddings.empty()
            ? random_embeddings(vocab, cfg.l, rng, cfg.train_embeddings)
            : load_pretrained(cfg.embeddings, vocab, cfg.l, rng,
                              cfg.train_embeddings);
    HelpfulnessModel model = make_model(cfg, std::move(emb), rng);

    const std::string ckpt = (out / "model.ckpt").string();
    save_checkpoint(ckpt, model, vocab);  // epochs=0 keeps the initial model

    std::ofstream log((out / "train_log.tsv").string(), std::ios::binary);
    if (!log) throw io_error("cannot write training log under " + cfg.out);
    TrainOutcome outcome =
        train_model(model, train, validation, cfg, &log,
                    [&](const EpochRecord&) { save_checkpoint(ckpt, model, vocab); });
    log.close();

    if (outcome.history.empty()) {
        std::cout << "no epochs requested; wrote initialized checkpoint " << ckpt
                  << "\n";
        return 0;
    }
    const EpochRecord& last = outcome.history.back();
    std::cout << "trained " << outcome.history.size() << " epochs on "
              << train.size() << " examples\n"
              << "final train loss " << last.train_loss << ", best epoch "
              << outcome.best_epoch << "\n"
              << "checkpoint " << ckpt << ", log "
              << (out / "train_log.tsv").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eval

std::string sanitize(const std::string& name) {
    std::string s = name;
    for (char& ch : s)
        if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
    return s;
}

int cmd_eval(ConfigCli& cli, const std::string& checkpoint_flag,
             const std::string& selector, const std::string& report_flag,
             const std::vector<std::string>& compare_paths) {
    RunConfig invoked = cli.assemble();

    if (!compare_paths.empty()) {
        std::vector<EvalReport> reports;
        for (const auto& p : compare_paths) {
            const std::string path = resolve_path(p);
            std::ifstream in(path, std::ios::binary);
            if (!in) throw io_error("cannot read report: " + path);
            std::ostringstream buf;
            buf << in.rdbuf();
            reports.push_back(report_from_json(buf.str()));
        }
        ComparisonTable table = compare_variants(reports);
        const std::string csv_path =
            report_flag.empty()
                ? (fs::path(invoked.out) / "comparison.csv").string()
                : resolve_path(report_flag);
        fs::create_directories(fs::path(csv_path).parent_path());
        std::ofstream csv(csv_path, std::ios::binary);
        csv << table.csv;
        std::cout << table.text << "comparison CSV: " << csv_path << "\n";
        return 0;
    }

    const std::string ckpt_path =
        checkpoint_flag.empty()
            ? (fs::path(invoked.out) / "model.ckpt").string()
            : resolve_path(checkpoint_flag);
    LoadedCheckpoint loaded = load_checkpoint(ckpt_path);

    // fold the user's explicit keys into the checkpoint's config; anything
    // that would alter the architecture is a hard error
    RunConfig effective = loaded.model.config;
    auto invoked_values = config_values(invoked);
    for (const auto& key : cli.explicit_keys)
        effective.set(key, invoked_values.at(key));
    effective.corpus = resolve_path(effective.corpus);
    effective.embeddings = resolve_path(effective.embeddings);
    effective.annotated = resolve_path(effective.annotated);
    effective.out = resolve_path(effective.out);
    effective.validate();
    if (effective.identity_text() != loaded.model.config.identity_text())
        throw config_error(
            "eval: flags disagree with the checkpoint's architecture; "
            "checkpoint has\n" +
            loaded.model.config.identity_text());
    loaded.model.config = effective;

    const std::uint64_t vocab_fp = loaded.vocab.fingerprint();
    EvalReport report;
    if (selector == "d1_test") {
        const fs::path out(effective.out);
        IngestManifest man = read_manifest((out / "manifest.json").string());
        if (man.vocab_fingerprint != vocab_fp)
            throw config_error(
                "eval: vocabulary fingerprint mismatch between checkpoint and "
                "dataset manifest; the checkpoint was trained on a different "
                "ingest run");
        auto test = read_dataset((out / "dataset_test.jsonl").string());
        report = evaluate(loaded.model, test, "d1_test", vocab_fp);
    } else if (selector == "d2" || selector.rfind("cross:", 0) == 0) {
        if (effective.annotated.empty())
            throw config_error("eval: selector '" + selector +
                               "' needs --annotated");
        auto rows = load_annotated(effective.annotated, loaded.vocab,
                                   effective.max_len, effective.min_words);
        if (selector == "d2") {
            report = evaluate(loaded.model, rows, "d2", vocab_fp);
        } else {
            std::string pair = selector.substr(6);
            const std::string arrow = "→";  // cross:A→B or cross:A:B
            std::size_t cut = pair.find(arrow);
            std::size_t skip = arrow.size();
            if (cut == std::string::npos) {
                cut = pair.find(':');
                skip = 1;
            }
            if (cut == std::string::npos || cut == 0 ||
                cut + skip >= pair.size())
                throw config_error(
                    "eval: malformed cross selector '" + selector +
                    "' (expected cross:TRAIN_CATEGORY:EVAL_CATEGORY)");
            report = cross_domain(loaded.model, rows, pair.substr(0, cut),
                                  pair.substr(cut + skip), vocab_fp);
        }
    } else {
        throw config_error("eval: unknown data selector '" + selector +
                           "' (expected d1_test, d2, or cross:A:B)");
    }

    const std::string report_path =
        report_flag.empty()
            ? (fs::path(effective.out) /
               ("report_" + sanitize(report.experiment_name) + ".json"))
                  .string()
            : resolve_path(report_flag);
    fs::create_directories(fs::path(report_path).parent_path());
    std::ofstream rf(report_path, std::ios::binary);
    if (!rf) throw io_error("cannot write report: " + report_path);
    rf << report_to_json(report);
    std::cout << render_report(report) << "report: " << report_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// predict

int cmd_predict(const std::string& checkpoint_flag, const std::string& input,
                const std::string& out_dir) {
    const std::string ckpt_path =
        checkpoint_flag.empty() ? (fs::path(out_dir) / "model.ckpt").string()
                                : resolve_path(checkpoint_flag);
    LoadedCheckpoint loaded = load_checkpoint(ckpt_path);

    std::ifstream file;
    std::istream* in = &std::cin;
    if (!input.empty()) {
        file.open(resolve_path(input), std::ios::binary);
        if (!file) throw io_error("cannot read input file: " + resolve_path(input));
        in = &file;
    }

    RngStream rng(0);  // inference never draws from it
    std::cout << std::fixed << std::setprecision(4);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(*in, line)) {
        ++line_no;
        std::vector<std::string> tokens = tokenize(line);
        if (tokens.size() < loaded.model.config.min_words)
            std::cerr << "line " << line_no << ": only " << tokens.size()
                      << (tokens.size() == 1 ? " token" : " tokens")
                      << ", score may be unreliable\n";
        TokenizedReview review =
            encode(tokens, loaded.vocab, loaded.model.config.max_len);
        std::cout << clamp_score(predict(review, loaded.model, false, rng))
                  << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyReport {
    bool all_pass = true;
    void record(const std::string& name, bool pass, const std::string& detail) {
        all_pass &= pass;
        std::cout << name << ": " << (pass ? "PASS" : "FAIL");
        if (!detail.empty()) std::cout << " (" << detail << ")";
        std::cout << "\n";
    }
};

Vocabulary toy_vocabulary(std::size_t words) {
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < words; ++i)
        tokens.push_back("w" + std::to_string(i));
    return Vocabulary::build({tokens}, 1);
}

int cmd_verify(RunConfig cfg, const std::string& corrupt_param) {
    cfg.validate();
    VerifyReport rep;
    std::ostringstream num;
    num << std::setprecision(3);

    // gradient check under both attention scalings
    for (const std::string scale : {"d_k", "l"}) {
        RunConfig vcfg = cfg;
        vcfg.scale_dim = scale;
        RngStream rng(cfg.seed);
        Vocabulary vocab = toy_vocabulary(40);
        HelpfulnessModel model =
            make_model(vcfg, random_embeddings(vocab, vcfg.l, rng, true), rng);

        std::vector<int> ids;
        for (std::size_t i = 0; i < 12; ++i)
            ids.push_back(static_cast<int>(2 + rng.index(vocab.size() - 2)));
        RngStream unused(0);
        const Tensor target = Tensor::scalar(0.7);
        auto f = [&]() {
            Tensor raw = predict_graph(ids, ids.size(), model, false, unused);
            return mse_loss(raw, target);
        };

        auto params = model.named_parameters();
        std::function<void()> hook;
        if (!corrupt_param.empty() && scale == "d_k") {
            bool known = false;
            for (const auto& [name, t] : params) known |= name == corrupt_param;
            if (!known)
                throw config_error("verify: --corrupt-param names unknown "
                                   "parameter '" + corrupt_param + "'");
            hook = [&params, &corrupt_param]() {
                for (auto& [name, t] : params)
                    if (name == corrupt_param && t.has_grad())
                        Tensor(t).grad()[0] += 0.5;
            };
        }

        GradCheckResult res = gradient_check(f, params, 1e-4, 60, hook);
        std::ostringstream detail;
        detail << std::setprecision(3) << "max rel err " << res.max_rel_error
               << " at " << res.worst_param << "[" << res.worst_coord << "], "
               << res.coords_checked << " coords, tolerance 1e-3";
        rep.record("gradient check (scale_dim=" + scale + ")", res.passed(1e-3),
                   detail.str());
    }

    // positional encoding against a separately written evaluation
    {
        const std::size_t n = 50, l = cfg.l;
        Tensor pe = positional_encoding(n, l, cfg.j);
        double worst = 0.0;
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t i = 0; 2 * i < l; ++i) {
                const double divisor =
                    std::pow(cfg.j, (2.0 * static_cast<double>(i)) /
                                        static_cast<double>(l));
                const double angle = static_cast<double>(s) / divisor;
                worst = std::max(worst,
                                 std::abs(pe.at(s, 2 * i) - std::sin(angle)));
                worst = std::max(
                    worst, std::abs(pe.at(s, 2 * i + 1) - std::cos(angle)));
            }
        bool row0 = true;
        for (std::size_t k = 0; k < l; ++k)
            row0 &= pe.at(0, k) == (k % 2 ? 1.0 : 0.0);
        std::ostringstream detail;
        detail << std::setprecision(3) << "max deviation " << worst
               << ", tolerance 1e-9, position-0 row "
               << (row0 ? "exact" : "WRONG");
        rep.record("positional encoding oracle", worst < 1e-9 && row0,
                   detail.str());
    }

    // masked softmax rows must be proper distributions
    {
        RngStream rng(cfg.seed + 1);
        double worst = 0.0;
        for (int round = 0; round < 10; ++round) {
            const std::size_t rows = 10, cols = 12;
            Tensor x = Tensor::uniform({rows, cols}, -4.0, 4.0, rng);
            std::vector<std::uint8_t> mask(rows * cols);
            for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t k = 0; k < cols; ++k)
                    mask[r * cols + k] = rng.bernoulli(0.6);
                mask[r * cols + rng.index(cols)] = 1;  // keep a survivor
            }
            Tensor p = softmax_rows(x, &mask);
            for (std::size_t r = 0; r < rows; ++r) {
                double sum = 0.0;
                for (std::size_t k = 0; k < cols; ++k) {
                    sum += p.at(r, k);
                    if (!mask[r * cols + k] && p.at(r, k) != 0.0) worst = 1.0;
                }
                worst = std::max(worst, std::abs(sum - 1.0));
            }
        }
        std::ostringstream detail;
        detail << std::setprecision(3) << "max |row sum - 1| = " << worst
               << " over 100 random masked rows, tolerance 1e-9";
        rep.record("softmax row sums", worst < 1e-9, detail.str());
    }

    // attention commutes with input permutation (no positional signal here)
    {
        RngStream rng(cfg.seed + 2);
        MultiHeadAttention attn =
            make_attention(cfg.l, cfg.h, cfg.scale_dim, rng);
        const std::size_t n = 8;
        Tensor x = Tensor::uniform({n, cfg.l}, -1.0, 1.0, rng);
        Tensor base = self_attention(x, attn, std::vector<std::uint8_t>(n, 1));
        double worst = 0.0;
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        for (int round = 0; round < 20; ++round) {
            rng.shuffle(perm);
            std::vector<double> pdata(n * cfg.l);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t k = 0; k < cfg.l; ++k)
                    pdata[r * cfg.l + k] = x.at(perm[r], k);
            Tensor px = Tensor::from_data({n, cfg.l}, pdata);
            Tensor pout =
                self_attention(px, attn, std::vector<std::uint8_t>(n, 1));
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t k = 0; k < cfg.l; ++k)
                    worst = std::max(
                        worst, std::abs(pout.at(r, k) - base.at(perm[r], k)));
        }
        std::ostringstream detail;
        detail << std::setprecision(3) << "max deviation " << worst
               << " over 20 permutations, tolerance 1e-9";
        rep.record("attention permutation equivariance", worst < 1e-9,
                   detail.str());
    }

    // extra padding with correct masks must not move predictions
    {
        double worst = 0.0;
        std::size_t pads = 50;
        for (int round = 0; round < 5; ++round) {
            RngStream rng(cfg.seed + 3 + static_cast<std::uint64_t>(round));
            Vocabulary vocab = toy_vocabulary(30);
            HelpfulnessModel model = make_model(
                cfg, random_embeddings(vocab, cfg.l, rng, true), rng);
            const std::size_t n =
                std::min<std::size_t>(6 + rng.index(10), cfg.max_len - 1);
            std::vector<int> ids;
            for (std::size_t i = 0; i < n; ++i)
                ids.push_back(static_cast<int>(2 + rng.index(vocab.size() - 2)));
            RngStream unused(0);
            const double bare =
                predict_graph(ids, n, model, false, unused).value();
            std::vector<int> padded = ids;
            pads = std::min<std::size_t>(50, cfg.max_len - n);
            padded.resize(n + pads, Vocabulary::pad_id);
            const double grown =
                predict_graph(padded, n, model, false, unused).value();
            worst = std::max(worst, std::abs(bare - grown));
        }
        std::ostringstream detail;
        detail << std::setprecision(3) << "max |delta| = " << worst
               << " over 5 models with " << pads
               << " extra pads, tolerance 1e-9";
        rep.record("padding invariance", worst < 1e-9, detail.str());
    }

    std::cout << (rep.all_pass ? "all checks passed"
                               : "verification FAILED")
              << "\n";
    return rep.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"context-aware review helpfulness prediction"};
    app.require_subcommand(1);

    ConfigCli ingest_cfg, train_cfg, eval_cfg, verify_cfg;

    CLI::App* ingest = app.add_subcommand(
        "ingest", "filter a raw corpus into splits, vocabulary and manifest");
    ingest_cfg.attach(ingest);

    CLI::App* train =
        app.add_subcommand("train", "train a model on an ingested dataset");
    train_cfg.attach(train);

    CLI::App* eval =
        app.add_subcommand("eval", "score a checkpoint and write a report");
    eval_cfg.attach(eval);
    std::string eval_checkpoint, eval_selector = "d1_test", eval_report;
    std::vector<std::string> compare_paths;
    eval->add_option("--checkpoint", eval_checkpoint,
                     "model checkpoint (default: <out>/model.ckpt)");
    eval->add_option("--data", eval_selector,
                     "dataset selector: d1_test, d2, or cross:A:B");
    eval->add_option("--report", eval_report, "where to write the report");
    eval->add_option("--compare", compare_paths,
                     "compare existing report JSON files instead of evaluating");

    CLI::App* predict = app.add_subcommand(
        "predict", "score review text from standard input or a file");
    std::string predict_checkpoint, predict_input, predict_out = "out";
    predict->add_option("--checkpoint", predict_checkpoint,
                        "model checkpoint (default: <out>/model.ckpt)");
    predict->add_option("--input", predict_input,
                        "file of reviews, one per line (default: stdin)");
    predict->add_option("--out", predict_out,
                        "directory holding the default checkpoint");

    CLI::App* verify = app.add_subcommand(
        "verify", "run the numerical self-checks on a fresh model");
    verify_cfg.attach(verify);
    std::string corrupt_param;
    verify->add_option("--corrupt-param", corrupt_param,
                       "poison this parameter's gradient (self-test hook)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*ingest) return cmd_ingest(ingest_cfg.assemble());
        if (*train) return cmd_train(train_cfg.assemble());
        if (*eval)
            return cmd_eval(eval_cfg, eval_checkpoint, eval_selector,
                            eval_report, compare_paths);
        if (*predict)
            return cmd_predict(predict_checkpoint, predict_input,
                               resolve_path(predict_out));
        if (*verify) return cmd_verify(verify_cfg.assemble(), corrupt_param);
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
