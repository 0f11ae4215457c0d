#pragma once

#include <vector>

#include "cfrec/rng.hpp"
#include "cfrec/tensor.hpp"

namespace cfrec {

// Differentiable free functions over Tensor handles. Every op validates its
// shape contract and registers the matching gradient rule; under NoGradGuard
// only values are computed.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Hadamard product; shapes must match exactly (no broadcasting).
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor add_const(const Tensor& a, double c);

Tensor relu(const Tensor& a);

/// Elementwise logistic function, branch-on-sign so exp never overflows.
/// Outputs are strictly inside (0,1) for finite inputs.
Tensor sigmoid(const Tensor& a);

/// Softmax over a rank-1 tensor, computed with max-shift.
Tensor softmax(const Tensor& v);

/// Sum of all entries -> scalar.
Tensor sum(const Tensor& a);

/// n-ary sum of scalar tensors in index order -> scalar. Keeps batch loss
/// graphs flat (one node) and the reduction order fixed.
Tensor sum_scalars(const std::vector<Tensor>& xs);

/// {m,k} x {k,n} -> {m,n}.
Tensor matmul(const Tensor& a, const Tensor& b);

/// M {m,n} + row-broadcast bias {n}.
Tensor add_row_bias(const Tensor& m, const Tensor& bias);

/// x {n}, w {n,m}, bias {m} -> x^T w + bias, shape {m}.
Tensor vec_linear(const Tensor& x, const Tensor& w, const Tensor& bias);

/// Embedding gather: rows `ids` of table {v,d} -> {|ids|,d}. Gradient
/// scatter-adds back into the gathered rows.
Tensor lookup_rows(const Tensor& table, const std::vector<int>& ids);

/// Single-row gather -> {d}.
Tensor lookup_row(const Tensor& table, int id);

/// Valid (no padding) 1-D cross-correlation.
/// seq {L,d_in}, kernels {w,d_in,d_out}, bias {d_out} -> {L-w+1,d_out}.
Tensor conv1d(const Tensor& seq, const Tensor& kernels, const Tensor& bias);

/// Per-channel windowed maximum over {L,d}. Backward routes each window's
/// gradient to the first position attaining the maximum.
Tensor maxpool1d(const Tensor& seq, int window, int stride);

/// alpha^T H: rows {p,d} weighted by alpha {p} -> {d}.
Tensor weighted_rows_sum(const Tensor& rows, const Tensor& alpha);

/// Inverted dropout: in training mode zeroes each unit independently with
/// probability drop_rate and scales survivors by 1/(1-drop_rate); in eval
/// mode returns the input tensor itself.
Tensor dropout(const Tensor& x, double drop_rate, Rng& rng, bool train);

/// Copy into a new rank-1 tensor {numel}.
Tensor flatten(const Tensor& x);

}  // namespace cfrec
