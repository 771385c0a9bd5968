#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "revhelp/errors.hpp"
#include "revhelp/rng.hpp"

namespace revhelp {

namespace detail {

struct TensorImpl {
    std::vector<std::size_t> shape;
    std::vector<double> data;
    bool requires_grad = false;
    // Empty vector means "no gradient yet"; when present it has data.size()
    // entries and accumulates additively across backward passes.
    std::vector<double> grad;

    // Autograd graph. parents holds the inputs this node was computed from;
    // backprop receives this node's flowing gradient and per-parent output
    // buffers (nullptr for parents that do not need gradient).
    std::vector<std::shared_ptr<TensorImpl>> parents;
    std::function<void(const std::vector<double>& out_grad,
                       const std::vector<std::vector<double>*>& parent_grads)>
        backprop;
};

}  // namespace detail

// Dense row-major tensor of 64-bit floats with reverse-mode autodiff.
// Copying a Tensor copies the handle, not the storage: ops build a graph of
// shared nodes and backward() walks it. Data is immutable by convention once
// a node has consumers; parameters are mutated only between steps.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
    static Tensor full(std::vector<std::size_t> shape, double value,
                       bool requires_grad = false);
    static Tensor from_data(std::vector<std::size_t> shape, std::vector<double> data,
                            bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);
    static Tensor uniform(std::vector<std::size_t> shape, double lo, double hi,
                          RngStream& rng, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }

    const std::vector<std::size_t>& shape() const { return impl_->shape; }
    std::size_t rank() const { return impl_->shape.size(); }
    std::size_t dim(std::size_t i) const { return impl_->shape[i]; }
    std::size_t numel() const { return impl_->data.size(); }

    std::vector<double>& data() { return impl_->data; }
    const std::vector<double>& data() const { return impl_->data; }

    bool requires_grad() const { return impl_->requires_grad; }
    void set_requires_grad(bool b) { impl_->requires_grad = b; }

    bool has_grad() const { return !impl_->grad.empty(); }
    std::vector<double>& grad();
    const std::vector<double>& grad() const;
    // Keeps the buffer, sets it to zero.
    void zero_grad();
    // Removes the buffer entirely ("no gradient" state).
    void clear_grad();

    // Scalar convenience; throws on numel() != 1.
    double value() const;
    double at(std::size_t i) const { return impl_->data[i]; }
    double at(std::size_t i, std::size_t j) const {
        return impl_->data[i * impl_->shape[1] + j];
    }

    bool all_finite() const;

    std::shared_ptr<detail::TensorImpl> impl() const { return impl_; }

    explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}

private:
    std::shared_ptr<detail::TensorImpl> impl_;
};

// Reverse-mode sweep from a scalar loss. Gradients flow through transient
// buffers and are deposited additively into .grad of every reachable tensor
// with requires_grad set, so calling backward twice on the same graph
// doubles every gradient exactly.
void backward(const Tensor& loss);

}  // namespace revhelp
