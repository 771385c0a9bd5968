#include "revhelp/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace revhelp {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

ConstMatMap as_mat(const std::vector<double>& v, std::size_t rows, std::size_t cols) {
    return ConstMatMap(v.data(), static_cast<Eigen::Index>(rows),
                       static_cast<Eigen::Index>(cols));
}

MatMap as_mat(std::vector<double>& v, std::size_t rows, std::size_t cols) {
    return MatMap(v.data(), static_cast<Eigen::Index>(rows),
                  static_cast<Eigen::Index>(cols));
}

std::string shape_str(const std::vector<std::size_t>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

using Backprop = std::function<void(const std::vector<double>&,
                                    const std::vector<std::vector<double>*>&)>;

// Builds the output node. Parents and the backward closure are attached only
// when some input actually needs gradient, so inference builds no graph.
Tensor make_node(std::vector<std::size_t> shape, std::vector<double> data,
                 std::vector<Tensor> parents, Backprop backprop) {
    Tensor out = Tensor::from_data(std::move(shape), std::move(data));
    bool needs_grad = false;
    for (const Tensor& p : parents)
        if (p.requires_grad()) needs_grad = true;
    if (needs_grad) {
        out.set_requires_grad(true);
        auto impl = out.impl();
        impl->parents.reserve(parents.size());
        for (const Tensor& p : parents) impl->parents.push_back(p.impl());
        impl->backprop = std::move(backprop);
    }
    return out;
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
    if (t.rank() != rank)
        throw shape_error(std::string(op) + ": expected rank " + std::to_string(rank) +
                          " tensor, got " + shape_str(t.shape()));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "matmul");
    require_rank(b, 2, "matmul");
    if (a.dim(1) != b.dim(0))
        throw shape_error("matmul: inner dimensions differ, " + shape_str(a.shape()) +
                          " x " + shape_str(b.shape()));
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);

    std::vector<double> out(m * n);
    as_mat(out, m, n).noalias() = as_mat(a.data(), m, k) * as_mat(b.data(), k, n);

    return make_node(
        {m, n}, std::move(out), {a, b},
        [a, b, m, k, n](const std::vector<double>& g,
                        const std::vector<std::vector<double>*>& pg) {
            auto gm = as_mat(g, m, n);
            if (pg[0])
                as_mat(*pg[0], m, k).noalias() += gm * as_mat(b.data(), k, n).transpose();
            if (pg[1])
                as_mat(*pg[1], k, n).noalias() += as_mat(a.data(), m, k).transpose() * gm;
        });
}

Tensor transpose(const Tensor& a) {
    require_rank(a, 2, "transpose");
    const std::size_t m = a.dim(0), n = a.dim(1);
    std::vector<double> out(m * n);
    as_mat(out, n, m).noalias() = as_mat(a.data(), m, n).transpose();
    return make_node({n, m}, std::move(out), {a},
                     [m, n](const std::vector<double>& g,
                            const std::vector<std::vector<double>*>& pg) {
                         if (pg[0])
                             as_mat(*pg[0], m, n).noalias() += as_mat(g, n, m).transpose();
                     });
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw shape_error("add: shapes differ, " + shape_str(a.shape()) + " vs " +
                          shape_str(b.shape()));
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) + b.at(i);
    return make_node(a.shape(), std::move(out), {a, b},
                     [](const std::vector<double>& g,
                        const std::vector<std::vector<double>*>& pg) {
                         for (int p = 0; p < 2; ++p)
                             if (pg[p])
                                 for (std::size_t i = 0; i < g.size(); ++i)
                                     (*pg[p])[i] += g[i];
                     });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw shape_error("mul: shapes differ, " + shape_str(a.shape()) + " vs " +
                          shape_str(b.shape()));
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * b.at(i);
    return make_node(a.shape(), std::move(out), {a, b},
                     [a, b](const std::vector<double>& g,
                            const std::vector<std::vector<double>*>& pg) {
                         for (std::size_t i = 0; i < g.size(); ++i) {
                             if (pg[0]) (*pg[0])[i] += g[i] * b.at(i);
                             if (pg[1]) (*pg[1])[i] += g[i] * a.at(i);
                         }
                     });
}

Tensor scale(const Tensor& a, double s) {
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * s;
    return make_node(a.shape(), std::move(out), {a},
                     [s](const std::vector<double>& g,
                         const std::vector<std::vector<double>*>& pg) {
                         if (pg[0])
                             for (std::size_t i = 0; i < g.size(); ++i)
                                 (*pg[0])[i] += g[i] * s;
                     });
}

Tensor sum(const Tensor& a) {
    double total = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) total += a.at(i);
    return make_node({1}, {total}, {a},
                     [](const std::vector<double>& g,
                        const std::vector<std::vector<double>*>& pg) {
                         if (pg[0])
                             for (double& x : *pg[0]) x += g[0];
                     });
}

Tensor relu(const Tensor& x) {
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.at(i) > 0.0 ? x.at(i) : 0.0;
    return make_node(x.shape(), std::move(out), {x},
                     [x](const std::vector<double>& g,
                         const std::vector<std::vector<double>*>& pg) {
                         if (!pg[0]) return;
                         // Subgradient at 0 is 0.
                         for (std::size_t i = 0; i < g.size(); ++i)
                             if (x.at(i) > 0.0) (*pg[0])[i] += g[i];
                     });
}

Tensor softmax_rows(const Tensor& x, const std::vector<std::uint8_t>* mask) {
    require_rank(x, 2, "softmax_rows");
    const std::size_t m = x.dim(0), n = x.dim(1);
    if (mask && mask->size() != m * n)
        throw shape_error("softmax_rows: mask size " + std::to_string(mask->size()) +
                          " does not match " + shape_str(x.shape()));

    std::vector<double> out(m * n, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t base = r * n;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < n; ++c)
            if (!mask || (*mask)[base + c]) mx = std::max(mx, x.at(base + c));
        if (!std::isfinite(mx))
            throw degenerate_input_error("softmax_rows: row " + std::to_string(r) +
                                         " is fully masked");
        double denom = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            if (!mask || (*mask)[base + c]) {
                out[base + c] = std::exp(x.at(base + c) - mx);
                denom += out[base + c];
            }
        }
        for (std::size_t c = 0; c < n; ++c) out[base + c] /= denom;
        if (mask)  // keep masked weights exactly zero
            for (std::size_t c = 0; c < n; ++c)
                if (!(*mask)[base + c]) out[base + c] = 0.0;
    }

    // ds = p * (dp - sum_j dp_j p_j) per row, restricted to unmasked entries.
    std::vector<double> probs = out;
    std::vector<std::uint8_t> mask_copy = mask ? *mask : std::vector<std::uint8_t>{};
    return make_node({m, n}, std::move(out), {x},
                     [probs = std::move(probs), mask_copy = std::move(mask_copy), m,
                      n](const std::vector<double>& g,
                         const std::vector<std::vector<double>*>& pg) {
                         if (!pg[0]) return;
                         for (std::size_t r = 0; r < m; ++r) {
                             const std::size_t base = r * n;
                             double dot = 0.0;
                             for (std::size_t c = 0; c < n; ++c)
                                 dot += g[base + c] * probs[base + c];
                             for (std::size_t c = 0; c < n; ++c) {
                                 if (!mask_copy.empty() && !mask_copy[base + c]) continue;
                                 (*pg[0])[base + c] +=
                                     probs[base + c] * (g[base + c] - dot);
                             }
                         }
                     });
}

Tensor conv1d(const Tensor& x, std::size_t width, const Tensor& kernels,
              const Tensor& bias) {
    require_rank(x, 2, "conv1d");
    require_rank(kernels, 3, "conv1d kernels");
    require_rank(bias, 1, "conv1d bias");
    if (width < 1 || width > 3)
        throw config_error("conv1d: filter width " + std::to_string(width) +
                           " outside the supported {1,2,3}");
    const std::size_t n = x.dim(0), l = x.dim(1), c = kernels.dim(2);
    if (kernels.dim(0) != width || kernels.dim(1) != l)
        throw shape_error("conv1d: kernel shape " + shape_str(kernels.shape()) +
                          " does not match width " + std::to_string(width) +
                          " and input " + shape_str(x.shape()));
    if (bias.dim(0) != c)
        throw shape_error("conv1d: bias length does not match channel count");
    if (n < width)
        throw sequence_too_short_error("conv1d: sequence length " + std::to_string(n) +
                                       " shorter than filter width " +
                                       std::to_string(width));
    const std::size_t p = n - width + 1;   // output positions
    const std::size_t wl = width * l;      // unrolled window size

    // im2col: windows[t] is the flattened window starting at position t.
    // The kernel tensor [width×l×c] is row-major, i.e. exactly a [wl×c]
    // matrix, so the convolution is one GEMM.
    std::vector<double> cols(p * wl);
    for (std::size_t t = 0; t < p; ++t)
        std::copy_n(x.data().data() + t * l, wl, cols.data() + t * wl);

    std::vector<double> out(p * c);
    as_mat(out, p, c).noalias() =
        as_mat(cols, p, wl) * as_mat(kernels.data(), wl, c);
    for (std::size_t t = 0; t < p; ++t)
        for (std::size_t j = 0; j < c; ++j) out[t * c + j] += bias.at(j);

    return make_node(
        {p, c}, std::move(out), {x, kernels, bias},
        [x, kernels, cols = std::move(cols), p, wl, c, l,
         width](const std::vector<double>& g,
                const std::vector<std::vector<double>*>& pg) {
            auto gm = as_mat(g, p, c);
            if (pg[1])
                as_mat(*pg[1], wl, c).noalias() += as_mat(cols, p, wl).transpose() * gm;
            if (pg[2])
                for (std::size_t t = 0; t < p; ++t)
                    for (std::size_t j = 0; j < c; ++j) (*pg[2])[j] += g[t * c + j];
            if (pg[0]) {
                // dcols = g * K^T, then scatter windows back onto positions.
                std::vector<double> dcols(p * wl);
                as_mat(dcols, p, wl).noalias() =
                    gm * as_mat(kernels.data(), wl, c).transpose();
                for (std::size_t t = 0; t < p; ++t)
                    for (std::size_t i = 0; i < wl; ++i)
                        (*pg[0])[t * l + i] += dcols[t * wl + i];
            }
        });
}

Tensor pool_positions(const Tensor& x, PoolMode mode) {
    require_rank(x, 2, "pool_positions");
    return pool_positions(x, mode, x.dim(0));
}

Tensor pool_positions(const Tensor& x, PoolMode mode, std::size_t valid_rows) {
    require_rank(x, 2, "pool_positions");
    const std::size_t p = x.dim(0), c = x.dim(1);
    if (valid_rows == 0)
        throw degenerate_input_error("pool_positions: empty position axis");
    if (valid_rows > p)
        throw shape_error("pool_positions: valid_rows exceeds position count");

    std::vector<double> out(c);
    if (mode == PoolMode::max) {
        std::vector<std::size_t> argmax(c, 0);
        for (std::size_t j = 0; j < c; ++j) {
            double best = x.at(0, j);
            for (std::size_t r = 1; r < valid_rows; ++r) {
                if (x.at(r, j) > best) {  // strict: ties keep the earliest position
                    best = x.at(r, j);
                    argmax[j] = r;
                }
            }
            out[j] = best;
        }
        return make_node({c}, std::move(out), {x},
                         [argmax = std::move(argmax), c](
                             const std::vector<double>& g,
                             const std::vector<std::vector<double>*>& pg) {
                             if (!pg[0]) return;
                             for (std::size_t j = 0; j < c; ++j)
                                 (*pg[0])[argmax[j] * c + j] += g[j];
                         });
    }
    for (std::size_t j = 0; j < c; ++j) {
        double s = 0.0;
        for (std::size_t r = 0; r < valid_rows; ++r) s += x.at(r, j);
        out[j] = s / static_cast<double>(valid_rows);
    }
    return make_node({c}, std::move(out), {x},
                     [valid_rows, c](const std::vector<double>& g,
                                     const std::vector<std::vector<double>*>& pg) {
                         if (!pg[0]) return;
                         const double inv = 1.0 / static_cast<double>(valid_rows);
                         for (std::size_t r = 0; r < valid_rows; ++r)
                             for (std::size_t j = 0; j < c; ++j)
                                 (*pg[0])[r * c + j] += g[j] * inv;
                     });
}

Tensor mean_rows(const Tensor& x, std::size_t valid_rows) {
    return pool_positions(x, PoolMode::avg, valid_rows);
}

Tensor dropout(const Tensor& x, double rate, RngStream& rng, bool training) {
    if (rate < 0.0 || rate >= 1.0)
        throw config_error("dropout: rate must lie in [0, 1), got " +
                           std::to_string(rate));
    if (!training || rate == 0.0) return x;

    const double keep_scale = 1.0 / (1.0 - rate);
    std::vector<std::uint8_t> keep(x.numel());
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) {
        keep[i] = rng.uniform() >= rate ? 1 : 0;
        out[i] = keep[i] ? x.at(i) * keep_scale : 0.0;
    }
    return make_node(x.shape(), std::move(out), {x},
                     [keep = std::move(keep), keep_scale](
                         const std::vector<double>& g,
                         const std::vector<std::vector<double>*>& pg) {
                         if (!pg[0]) return;
                         for (std::size_t i = 0; i < g.size(); ++i)
                             if (keep[i]) (*pg[0])[i] += g[i] * keep_scale;
                     });
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    require_rank(pred, 1, "mse_loss");
    require_rank(target, 1, "mse_loss");
    if (pred.dim(0) != target.dim(0))
        throw shape_error("mse_loss: length mismatch, " + std::to_string(pred.dim(0)) +
                          " vs " + std::to_string(target.dim(0)));
    const std::size_t b = pred.dim(0);
    double loss = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        const double d = pred.at(i) - target.at(i);
        loss += d * d;
    }
    loss /= static_cast<double>(b);
    return make_node({1}, {loss}, {pred, target},
                     [pred, target, b](const std::vector<double>& g,
                                       const std::vector<std::vector<double>*>& pg) {
                         const double s = 2.0 * g[0] / static_cast<double>(b);
                         for (std::size_t i = 0; i < b; ++i) {
                             const double d = pred.at(i) - target.at(i);
                             if (pg[0]) (*pg[0])[i] += s * d;
                             if (pg[1]) (*pg[1])[i] -= s * d;
                         }
                     });
}

Tensor stack_scalars(const std::vector<Tensor>& scalars) {
    if (scalars.empty()) throw contract_error("stack_scalars: empty input");
    std::vector<double> out;
    out.reserve(scalars.size());
    for (const Tensor& t : scalars) {
        if (t.numel() != 1)
            throw shape_error("stack_scalars: all inputs must be scalars");
        out.push_back(t.at(0));
    }
    return make_node({scalars.size()}, std::move(out), scalars,
                     [](const std::vector<double>& g,
                        const std::vector<std::vector<double>*>& pg) {
                         for (std::size_t i = 0; i < g.size(); ++i)
                             if (pg[i]) (*pg[i])[0] += g[i];
                     });
}

Tensor concat(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw contract_error("concat: empty input");
    std::vector<double> out;
    std::vector<std::size_t> offsets;
    for (const Tensor& t : parts) {
        require_rank(t, 1, "concat");
        offsets.push_back(out.size());
        out.insert(out.end(), t.data().begin(), t.data().end());
    }
    const std::size_t total = out.size();
    return make_node({total}, std::move(out), parts,
                     [offsets = std::move(offsets)](
                         const std::vector<double>& g,
                         const std::vector<std::vector<double>*>& pg) {
                         for (std::size_t p = 0; p < pg.size(); ++p) {
                             if (!pg[p]) continue;
                             for (std::size_t i = 0; i < pg[p]->size(); ++i)
                                 (*pg[p])[i] += g[offsets[p] + i];
                         }
                     });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw contract_error("concat_cols: empty input");
    const std::size_t m = parts[0].dim(0);
    std::size_t total = 0;
    std::vector<std::size_t> widths;
    for (const Tensor& t : parts) {
        require_rank(t, 2, "concat_cols");
        if (t.dim(0) != m)
            throw shape_error("concat_cols: row counts differ");
        widths.push_back(t.dim(1));
        total += t.dim(1);
    }
    std::vector<double> out(m * total);
    std::size_t col = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        for (std::size_t r = 0; r < m; ++r)
            std::copy_n(parts[p].data().data() + r * widths[p], widths[p],
                        out.data() + r * total + col);
        col += widths[p];
    }
    return make_node({m, total}, std::move(out), parts,
                     [widths = std::move(widths), m, total](
                         const std::vector<double>& g,
                         const std::vector<std::vector<double>*>& pg) {
                         std::size_t col = 0;
                         for (std::size_t p = 0; p < pg.size(); ++p) {
                             if (pg[p])
                                 for (std::size_t r = 0; r < m; ++r)
                                     for (std::size_t i = 0; i < widths[p]; ++i)
                                         (*pg[p])[r * widths[p] + i] +=
                                             g[r * total + col + i];
                             col += widths[p];
                         }
                     });
}

Tensor embedding_rows(const Tensor& table, const std::vector<int>& ids) {
    require_rank(table, 2, "embedding_rows");
    const std::size_t v = table.dim(0), l = table.dim(1);
    std::vector<double> out(ids.size() * l);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= v)
            throw shape_error("embedding_rows: id " + std::to_string(ids[i]) +
                              " outside vocabulary of size " + std::to_string(v));
        std::copy_n(table.data().data() + static_cast<std::size_t>(ids[i]) * l, l,
                    out.data() + i * l);
    }
    return make_node({ids.size(), l}, std::move(out), {table},
                     [ids, l](const std::vector<double>& g,
                              const std::vector<std::vector<double>*>& pg) {
                         if (!pg[0]) return;
                         for (std::size_t i = 0; i < ids.size(); ++i)
                             for (std::size_t k = 0; k < l; ++k)
                                 (*pg[0])[static_cast<std::size_t>(ids[i]) * l + k] +=
                                     g[i * l + k];
                     });
}

}  // namespace revhelp
