#pragma once

#include <stdexcept>
#include <string>

namespace revhelp {

// Base class for everything this library throws on purpose.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor dimension mismatches (matmul inner dims, loss length mismatch, ...).
struct shape_error : error {
    using error::error;
};

// Invalid settings: bad dropout rate, odd embedding dimension, too few
// examples to split, unknown variant names.
struct config_error : error {
    using error::error;
};

// API misuse: backward on a non-scalar, optimizer step without gradients.
struct contract_error : error {
    using error::error;
};

// NaN/Inf encountered where finite values are required.
struct numeric_error : error {
    using error::error;
};

// Inputs that leave an operation without a defined result: fully masked
// softmax row, empty pooling axis.
struct degenerate_input_error : error {
    using error::error;
};

// Convolution input shorter than the filter width.
struct sequence_too_short_error : error {
    using error::error;
};

// Malformed file contents (embedding lines, CSV rows, corrupt corpora).
struct format_error : error {
    using error::error;
};

struct io_error : error {
    using error::error;
};

// Vote pair with zero total votes has no X/Y label.
struct undefined_label_error : error {
    using error::error;
};

// Correlation of a zero-variance list; surfaced, never mapped to 0.
struct undefined_correlation_error : error {
    using error::error;
};

}  // namespace revhelp
