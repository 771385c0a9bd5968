#pragma once

#include <cstddef>
#include <vector>

#include "revhelp/tensor.hpp"

namespace revhelp {

// Per-parameter optimizer state. Moment buffers start empty and are sized on
// the first step.
struct AdamState {
    std::size_t step_count = 0;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// One bias-corrected Adam update over params[i] driven by states[i]. Every
// parameter must carry a populated gradient; gradients are cleared after the
// update so stale values can never leak into the next step.
void adam_step(std::vector<Tensor>& params, std::vector<AdamState>& states);

}  // namespace revhelp
