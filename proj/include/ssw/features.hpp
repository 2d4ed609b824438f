#pragma once

// Raw edge/node feature matrices for one walk subgraph plus neighbor
// alignment: every subgraph becomes a fixed (n_max+1) x d_in matrix with
// the anchor's aggregate row first, processed neighbor rows next, and
// exact zero padding after. Rows are per sampled edge, so a neighbor
// reached by parallel edges contributes one row per edge.

#include <cstddef>
#include <vector>

#include "ssw/strwalk.hpp"
#include "ssw/tensor.hpp"
#include "ssw/txgraph.hpp"

namespace ssw::feat {

inline constexpr std::size_t kValueCols = 3;  // log in-total, log out-total, tx count
inline constexpr std::size_t kTimeCols = 3;   // first offset, last offset, mean gap
inline constexpr std::size_t kEdgeCols = 3;   // log value, interval offset, direction
inline constexpr std::size_t kInputCols = kValueCols + kTimeCols + kEdgeCols;

struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// E: one row per sampled edge: [log10(1+eth), (ts-t_lo)/(t_hi-t_lo),
// 1 if outgoing from the anchor else 0]
Matrix build_edge_features(const walk::Subgraph& sg, walk::Interval iv);

struct NodeFeatures {
    Matrix xf;  // value-derived, per edge's far endpoint, within the interval
    Matrix xt;  // time-derived, same rows
};

NodeFeatures build_node_features(const tx::TemporalMultigraph& g, const walk::Subgraph& sg,
                                 walk::Interval iv);

// softmax(w[0..n]) . M — a convex combination of M's rows; n == 0
// yields the zero row.
std::vector<double> aggregate(const double* w, std::size_t n, const Matrix& m);

// Neighbor rows [xf | xt | ef], min-max scaled to [-1,1] per column over
// the true rows (constant columns collapse to 0), then LeakyReLU(0.01).
Matrix processed_rows(const NodeFeatures& nf, const Matrix& ef);

// (n_max+1) x d_in: row 0 = [w.xf, w.xt, w.ef] over the raw blocks
// (indicator e0 when n == 0), rows 1..n processed, rest zero.
Matrix align_neighbors(const NodeFeatures& nf, const Matrix& ef, const double* w,
                       std::size_t n_max);

// Everything about a subgraph that does not depend on learnable state,
// computed once per dataset and reused across epochs.
struct Prepared {
    std::size_t n = 0;  // true rows
    Matrix raw;         // n x d_in, feeds the anchor aggregate
    Matrix processed;   // n x d_in, neighbor rows as the encoder sees them
};

Prepared prepare(const tx::TemporalMultigraph& g, const walk::Subgraph& sg, walk::Interval iv);

// Differentiable alignment: same numbers as align_neighbors, with
// gradient flowing into W (shape 1 x n_max).
nn::Tensor align_tensor(const Prepared& pre, const nn::Tensor& w, std::size_t n_max);

}  // namespace ssw::feat
