#pragma once

#include <string>

#include "revhelp/model.hpp"
#include "revhelp/text.hpp"

namespace revhelp {

// Single-file binary archive: run config, vocabulary, and every parameter
// tensor by name with raw 64-bit payloads, guarded by a checksum.
// save -> load -> save reproduces the bytes exactly.
void save_checkpoint(const std::string& path, const HelpfulnessModel& m,
                     const Vocabulary& vocab);

struct LoadedCheckpoint {
    HelpfulnessModel model;
    Vocabulary vocab;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace revhelp
