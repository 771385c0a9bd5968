#include "revhelp/adam.hpp"

#include <cmath>
#include <string>

namespace revhelp {

void adam_step(std::vector<Tensor>& params, std::vector<AdamState>& states) {
    if (params.size() != states.size())
        throw contract_error("adam_step: " + std::to_string(params.size()) +
                             " parameters but " + std::to_string(states.size()) +
                             " optimizer states");
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = params[i];
        AdamState& st = states[i];
        if (!p.has_grad())
            throw contract_error("adam_step: parameter " + std::to_string(i) +
                                 " has no gradient");
        const std::vector<double>& g = p.grad();
        if (st.first_moment.empty()) {
            st.first_moment.assign(p.numel(), 0.0);
            st.second_moment.assign(p.numel(), 0.0);
        }
        if (st.first_moment.size() != p.numel())
            throw contract_error("adam_step: state " + std::to_string(i) +
                                 " tracks a different parameter size");

        st.step_count += 1;
        const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step_count));
        const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step_count));
        std::vector<double>& data = p.data();
        for (std::size_t k = 0; k < data.size(); ++k) {
            double& m = st.first_moment[k];
            double& v = st.second_moment[k];
            m = st.beta1 * m + (1.0 - st.beta1) * g[k];
            v = st.beta2 * v + (1.0 - st.beta2) * g[k] * g[k];
            const double m_hat = m / bc1;
            const double v_hat = v / bc2;
            data[k] -= st.learning_rate * m_hat / (std::sqrt(v_hat) + st.epsilon);
        }
        p.clear_grad();
    }
}

}  // namespace revhelp
