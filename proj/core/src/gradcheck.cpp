#include "revhelp/gradcheck.hpp"

#include <cmath>

namespace revhelp {

GradCheckResult gradient_check(
    const std::function<Tensor()>& f,
    const std::vector<std::pair<std::string, Tensor>>& params, double eps,
    std::size_t max_coords_per_param, const std::function<void()>& after_backward) {
    if (eps < 1e-6 || eps > 1e-3)
        throw config_error("gradient_check: eps must lie in [1e-6, 1e-3], got " +
                           std::to_string(eps));
    for (const auto& [name, p] : params) {
        if (!p.requires_grad())
            throw contract_error("gradient_check: parameter '" + name +
                                 "' does not require gradient");
        Tensor(p).clear_grad();
    }

    Tensor loss = f();
    if (!loss.all_finite())
        throw numeric_error("gradient_check: loss is not finite");
    backward(loss);
    if (after_backward) after_backward();

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const auto& [name, p] : params) {
        if (!p.has_grad())
            throw contract_error("gradient_check: no gradient reached parameter '" +
                                 name + "'");
        analytic.push_back(p.grad());
        Tensor(p).clear_grad();
    }

    GradCheckResult result;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor p = params[pi].second;
        std::vector<double>& data = p.data();
        std::size_t stride = 1;
        if (max_coords_per_param > 0 && data.size() > max_coords_per_param)
            stride = data.size() / max_coords_per_param;
        for (std::size_t k = 0; k < data.size(); k += stride) {
            const double saved = data[k];
            data[k] = saved + eps;
            const double up = f().value();
            data[k] = saved - eps;
            const double down = f().value();
            data[k] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            if (!std::isfinite(numeric) || !std::isfinite(analytic[pi][k]))
                throw numeric_error("gradient_check: non-finite value at '" +
                                    params[pi].first + "'[" + std::to_string(k) + "]");
            const double rel = std::abs(analytic[pi][k] - numeric) /
                               std::max(1.0, std::abs(numeric));
            ++result.coords_checked;
            if (rel > result.max_rel_error) {
                result.max_rel_error = rel;
                result.worst_param = params[pi].first;
                result.worst_coord = k;
            }
        }
    }
    return result;
}

}  // namespace revhelp
