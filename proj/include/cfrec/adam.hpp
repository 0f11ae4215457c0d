#pragma once

#include <vector>

#include "cfrec/tensor.hpp"

namespace cfrec {

/// Per-parameter Adam moments plus the shared step counter. Moment shapes
/// mirror the parameter shapes; the counter advances by exactly 1 per step.
struct AdamState {
    std::vector<Vec> m;
    std::vector<Vec> v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState init(const std::vector<Tensor>& params);
};

/// Classic Adam with bias correction. Weight decay enters as an L2 term on
/// the gradient (g <- g + wd * theta) before the moment updates. Parameters
/// are updated in place from their accumulated gradients.
void adam_step(std::vector<Tensor>& params, AdamState& state, double lr, double weight_decay);

}  // namespace cfrec
