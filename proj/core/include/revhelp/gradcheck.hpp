#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "revhelp/tensor.hpp"

namespace revhelp {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_param;
    std::size_t worst_coord = 0;
    std::size_t coords_checked = 0;

    bool passed(double threshold = 1e-3) const { return max_rel_error <= threshold; }
};

// Compares analytic gradients against central finite differences.
//
// f must rebuild its computation graph on every call, return the scalar loss,
// and be deterministic (any internal randomness reseeded inside f). params are
// the leaf tensors f reads; each gets perturbed in place. When a parameter has
// more than max_coords_per_param elements, coordinates are probed at an even
// stride (0 means probe everything). after_backward, when set, runs right
// after the analytic sweep — the hook exists so callers can deliberately
// corrupt a gradient and watch the check fail.
GradCheckResult gradient_check(
    const std::function<Tensor()>& f,
    const std::vector<std::pair<std::string, Tensor>>& params, double eps = 1e-4,
    std::size_t max_coords_per_param = 0,
    const std::function<void()>& after_backward = {});

}  // namespace revhelp
