#pragma once

#include <functional>
#include <vector>

#include "cfrec/tensor.hpp"

namespace cfrec {

/// Central-difference verification of reverse-mode gradients.
///
/// `f` rebuilds a scalar graph from the current values of `params` (the same
/// leaf tensors every call, so in-place perturbations are visible). Returns
/// the max over all parameter entries of
///   |analytic - numeric| / max(|analytic|, |numeric|, 1e-10).
/// `f` must be deterministic; throws NumericError on non-finite outputs.
double grad_check(const std::function<Tensor()>& f, std::vector<Tensor>& params, double h);

}  // namespace cfrec
