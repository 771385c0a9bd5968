#include "revhelp/tensor.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace revhelp {

namespace {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d == 0) throw shape_error("tensor dimensions must be positive");
        n *= d;
    }
    return n;
}

}  // namespace

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->data.assign(shape_numel(shape), 0.0);
    impl->shape = std::move(shape);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (double& x : t.data()) x = value;
    return t;
}

Tensor Tensor::from_data(std::vector<std::size_t> shape, std::vector<double> data,
                         bool requires_grad) {
    if (shape_numel(shape) != data.size())
        throw shape_error("from_data: shape does not match data length");
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

Tensor Tensor::uniform(std::vector<std::size_t> shape, double lo, double hi,
                       RngStream& rng, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    for (double& x : t.data()) x = rng.uniform(lo, hi);
    return t;
}

std::vector<double>& Tensor::grad() {
    if (impl_->grad.empty())
        throw contract_error("tensor has no gradient (backward not run or cleared)");
    return impl_->grad;
}

const std::vector<double>& Tensor::grad() const {
    if (impl_->grad.empty())
        throw contract_error("tensor has no gradient (backward not run or cleared)");
    return impl_->grad;
}

void Tensor::zero_grad() { impl_->grad.assign(impl_->data.size(), 0.0); }

void Tensor::clear_grad() { impl_->grad.clear(); }

double Tensor::value() const {
    if (numel() != 1) throw contract_error("value() requires a scalar tensor");
    return impl_->data[0];
}

bool Tensor::all_finite() const {
    for (double x : impl_->data)
        if (!std::isfinite(x)) return false;
    return true;
}

void backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1)
        throw contract_error("backward requires a scalar loss tensor");

    using detail::TensorImpl;

    // Iterative post-order DFS over parents.
    std::vector<TensorImpl*> topo;
    std::unordered_set<TensorImpl*> visited;
    std::vector<std::pair<TensorImpl*, std::size_t>> stack;
    stack.emplace_back(loss.impl().get(), 0);
    visited.insert(loss.impl().get());
    while (!stack.empty()) {
        auto& [node, next_child] = stack.back();
        if (next_child < node->parents.size()) {
            TensorImpl* child = node->parents[next_child++].get();
            if (visited.insert(child).second) stack.emplace_back(child, 0);
        } else {
            topo.push_back(node);
            stack.pop_back();
        }
    }
    // topo is post-order: parents before consumers. Walk it backwards.

    std::unordered_map<TensorImpl*, std::vector<double>> flow;
    flow[loss.impl().get()] = {1.0};

    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        TensorImpl* node = *it;
        auto fit = flow.find(node);
        if (fit == flow.end() || !node->backprop) continue;

        std::vector<std::vector<double>*> parent_bufs(node->parents.size(), nullptr);
        for (std::size_t i = 0; i < node->parents.size(); ++i) {
            TensorImpl* p = node->parents[i].get();
            if (!p->requires_grad) continue;
            auto [pit, inserted] = flow.try_emplace(p);
            if (inserted) pit->second.assign(p->data.size(), 0.0);
            parent_bufs[i] = &pit->second;
        }
        node->backprop(fit->second, parent_bufs);
    }

    for (auto& [node, g] : flow) {
        if (!node->requires_grad) continue;
        if (node->grad.empty()) node->grad.assign(node->data.size(), 0.0);
        for (std::size_t i = 0; i < g.size(); ++i) node->grad[i] += g[i];
    }
}

}  // namespace revhelp
