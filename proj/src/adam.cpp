#include "cfrec/adam.hpp"

#include <cmath>

namespace cfrec {

AdamState AdamState::init(const std::vector<Tensor>& params) {
    AdamState s;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const Tensor& p : params) {
        s.m.push_back(Vec::Zero(p.size()));
        s.v.push_back(Vec::Zero(p.size()));
    }
    return s;
}

void adam_step(std::vector<Tensor>& params, AdamState& state, double lr, double weight_decay) {
    if (state.m.size() != params.size() || state.v.size() != params.size())
        throw InvalidArgumentError("adam_step: state does not match parameter list");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = params[i];
        Vec g = p.has_grad() ? p.grad() : Vec::Zero(p.size());
        if (!g.allFinite()) throw NumericError("adam_step: non-finite gradient");
        if (weight_decay != 0.0) g += weight_decay * p.values_mut();
        Vec& m = state.m[i];
        Vec& v = state.v[i];
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
        Vec m_hat = m / bc1;
        Vec v_hat = v / bc2;
        p.values_mut().array() -= lr * m_hat.array() / (v_hat.array().sqrt() + state.eps);
    }
}

}  // namespace cfrec
