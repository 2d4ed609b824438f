#pragma once

// Differentiable tensor operations. Every op validates shapes up front
// (errors name both shapes), computes the forward value eagerly, and
// records its backward rule on the current tape when gradients are
// tracked.

#include <cstddef>
#include <vector>

#include "ssw/rng.hpp"
#include "ssw/tensor.hpp"

namespace ssw::nn {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// axis may be negative (python-style); default: last axis
Tensor softmax(const Tensor& a, int axis = -1);

Tensor leaky_relu(const Tensor& a, double slope = 0.01);
Tensor elu(const Tensor& a);
Tensor gelu(const Tensor& a);

// x: R x d rows normalized over the last axis; gamma/beta: length d
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

// x: B x d_in, w: d_in x d_out, b: length d_out broadcast over rows.
// Pass a default-constructed Tensor for b to skip the bias.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b = {});

// Train-mode only: scales kept entries by 1/(1-p). Identity when
// training is false or p == 0.
Tensor dropout(const Tensor& x, double p, Rng& rng, bool training);

// Softmax-fused negative log likelihood of `label`, times `weight`.
Tensor cross_entropy(const Tensor& logits, std::size_t label, double weight = 1.0);

Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& a, std::size_t r0, std::size_t r1);
Tensor slice_cols(const Tensor& a, std::size_t c0, std::size_t c1);

// out[i][j] = col[i] + row[j]; col: T (or T x 1), row: S (or S x 1)
Tensor outer_add(const Tensor& col, const Tensor& row);

// Non-differentiable helper: stable softmax of a plain buffer.
std::vector<double> softmax_values(const double* x, std::size_t n);

}  // namespace ssw::nn
