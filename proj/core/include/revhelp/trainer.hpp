#pragma once

#include <functional>
#include <ostream>
#include <vector>

#include "revhelp/adam.hpp"
#include "revhelp/ingest.hpp"
#include "revhelp/model.hpp"

namespace revhelp {

// One pass over the data: seeded shuffle, batches padded to their longest
// member with PAD ids and masked accordingly, one Adam step per batch.
// Returns the example-weighted mean MSE across the epoch.
double train_epoch(HelpfulnessModel& m, const std::vector<LabeledExample>& data,
                   std::size_t batch_size, std::vector<AdamState>& states,
                   RngStream& rng);

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    bool val_defined = false;
    double val_r = 0.0;
};

struct TrainOutcome {
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;  // 0 when no epoch ran
};

// Full training loop. Logs one line per epoch (epoch, train loss, validation
// Pearson; tab-separated, "undef" for an undefined correlation). on_improved
// fires whenever the tracked metric improves — validation Pearson when
// defined, lower train loss as the fallback — so the caller can snapshot the
// best checkpoint.
TrainOutcome train_model(HelpfulnessModel& m,
                         const std::vector<LabeledExample>& train,
                         const std::vector<LabeledExample>& validation,
                         const RunConfig& cfg, std::ostream* log,
                         const std::function<void(const EpochRecord&)>& on_improved = {});

}  // namespace revhelp
