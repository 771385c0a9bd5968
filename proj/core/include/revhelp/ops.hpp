#pragma once

#include <cstdint>
#include <vector>

#include "revhelp/tensor.hpp"

namespace revhelp {

enum class PoolMode { max, avg };

// Matrix product [m×k] x [k×n] -> [m×n]. Gradient flows to both inputs.
Tensor matmul(const Tensor& a, const Tensor& b);

// Transpose of a 2-D tensor.
Tensor transpose(const Tensor& a);

// Elementwise, same-shape.
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

// Sum of all entries -> scalar.
Tensor sum(const Tensor& a);

Tensor relu(const Tensor& x);

// Row-wise softmax of a 2-D tensor. mask, when given, is a row-major m×n
// array of 0/1 flags; positions with 0 get exactly zero weight. Every row
// must keep at least one unmasked entry.
Tensor softmax_rows(const Tensor& x, const std::vector<std::uint8_t>* mask = nullptr);

// Valid (no padding) 1-D convolution over the position axis.
// x: [n×l], kernels: [width×l×c], bias: [c] -> [(n-width+1)×c].
Tensor conv1d(const Tensor& x, std::size_t width, const Tensor& kernels,
              const Tensor& bias);

// Per-channel max or mean over the position axis of a [p×c] tensor -> [c].
// valid_rows restricts pooling to the first valid_rows positions (padding
// beyond a sequence's true length must not influence the result); max ties
// route the gradient to the earliest position.
Tensor pool_positions(const Tensor& x, PoolMode mode);
Tensor pool_positions(const Tensor& x, PoolMode mode, std::size_t valid_rows);

// Mean over the first valid_rows rows of an [n×l] tensor -> [l].
Tensor mean_rows(const Tensor& x, std::size_t valid_rows);

// Inverted dropout: in training each element survives with probability
// 1-rate and is scaled by 1/(1-rate); in inference the input is returned
// unchanged.
Tensor dropout(const Tensor& x, double rate, RngStream& rng, bool training);

// Mean squared error between two equal-length vectors -> scalar.
Tensor mse_loss(const Tensor& pred, const Tensor& target);

// Joins b scalar tensors into a [b] vector (for batched losses).
Tensor stack_scalars(const std::vector<Tensor>& scalars);

// Concatenate 1-D tensors -> one vector.
Tensor concat(const std::vector<Tensor>& parts);

// Concatenate 2-D tensors with equal row counts along the column axis.
Tensor concat_cols(const std::vector<Tensor>& parts);

// Gather rows of table [V×l] by id -> [ids.size()×l]; gradient scatters back.
Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids);

}  // namespace revhelp
