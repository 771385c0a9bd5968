#include "revhelp/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "revhelp/eval.hpp"
#include "revhelp/util.hpp"

namespace revhelp {

double train_epoch(HelpfulnessModel& m, const std::vector<LabeledExample>& data,
                   std::size_t batch_size, std::vector<AdamState>& states,
                   RngStream& rng) {
    if (data.empty()) throw contract_error("train_epoch: empty dataset");
    if (batch_size < 1) throw config_error("train_epoch: batch_size must be >= 1");

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    std::vector<Tensor> params = m.trainable_parameters();
    if (params.size() != states.size())
        throw contract_error("train_epoch: optimizer state count mismatch");

    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        std::size_t max_len = 0;
        for (std::size_t k = start; k < end; ++k)
            max_len = std::max(max_len, data[order[k]].tokens.token_ids.size());

        std::vector<Tensor> preds;
        std::vector<double> targets;
        preds.reserve(end - start);
        targets.reserve(end - start);
        for (std::size_t k = start; k < end; ++k) {
            const LabeledExample& ex = data[order[k]];
            std::vector<int> ids = ex.tokens.token_ids;
            const std::size_t valid_len = ids.size();
            ids.resize(max_len, Vocabulary::pad_id);
            preds.push_back(predict_graph(ids, valid_len, m, true, rng));
            targets.push_back(ex.score);
        }
        Tensor loss = mse_loss(stack_scalars(preds),
                               Tensor::from_data({targets.size()}, targets));
        if (!std::isfinite(loss.value()))
            throw numeric_error("training diverged: non-finite loss at batch " +
                                std::to_string(batch_index));
        backward(loss);

        // PAD embeddings stay identically zero: wipe their gradient so the
        // optimizer never touches that row.
        if (m.embedding.matrix.requires_grad() && m.embedding.matrix.has_grad())
            std::fill_n(m.embedding.matrix.grad().begin() +
                            Vocabulary::pad_id * m.config.l,
                        m.config.l, 0.0);

        adam_step(params, states);
        loss_sum += loss.value() * static_cast<double>(end - start);
        ++batch_index;
    }
    return loss_sum / static_cast<double>(order.size());
}

namespace {

struct BestTracker {
    bool any = false;
    bool from_val = false;
    double val_r = 0.0;
    double train_loss = 0.0;

    // Defined validation correlation beats the loss fallback; higher r wins,
    // then lower loss.
    bool improves(const EpochRecord& rec) const {
        if (!any) return true;
        if (rec.val_defined != from_val) return rec.val_defined;
        if (rec.val_defined) return rec.val_r > val_r;
        return rec.train_loss < train_loss;
    }
    void update(const EpochRecord& rec) {
        any = true;
        from_val = rec.val_defined;
        val_r = rec.val_r;
        train_loss = rec.train_loss;
    }
};

}  // namespace

TrainOutcome train_model(HelpfulnessModel& m,
                         const std::vector<LabeledExample>& train,
                         const std::vector<LabeledExample>& validation,
                         const RunConfig& cfg, std::ostream* log,
                         const std::function<void(const EpochRecord&)>& on_improved) {
    RngStream rng(cfg.seed);
    std::vector<AdamState> states(m.trainable_parameters().size());
    for (auto& st : states) st.learning_rate = cfg.learning_rate;

    if (log) *log << "epoch\ttrain_loss\tval_r\n";

    TrainOutcome outcome;
    BestTracker best;
    RngStream eval_rng(cfg.seed + 1);  // never drawn from: evaluation runs inference
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = train_epoch(m, train, cfg.batch_size, states, rng);

        // one validation example can't support a correlation; treat it like
        // no validation at all rather than failing the run
        if (validation.size() >= 2) {
            std::vector<double> pred, gold;
            pred.reserve(validation.size());
            gold.reserve(validation.size());
            for (const auto& ex : validation) {
                pred.push_back(clamp_score(predict(ex.tokens, m, false, eval_rng)));
                gold.push_back(ex.score);
            }
            try {
                rec.val_r = pearson(pred, gold);
                rec.val_defined = true;
            } catch (const undefined_correlation_error&) {
                rec.val_defined = false;
            }
        }

        if (log) {
            *log << epoch << '\t' << double_to_text(rec.train_loss) << '\t'
                 << (rec.val_defined ? double_to_text(rec.val_r) : "undef") << '\n';
        }

        if (best.improves(rec)) {
            best.update(rec);
            outcome.best_epoch = epoch;
            if (on_improved) on_improved(rec);
        }
        outcome.history.push_back(rec);
    }
    return outcome;
}

}  // namespace revhelp
