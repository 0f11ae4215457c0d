#include "cfrec/grad_check.hpp"

#include <cmath>

namespace cfrec {

double grad_check(const std::function<Tensor()>& f, std::vector<Tensor>& params, double h) {
    if (h <= 0.0) throw InvalidArgumentError("grad_check: h must be positive");

    for (Tensor& p : params) p.zero_grad();
    Tensor loss = f();
    if (!std::isfinite(loss.value())) throw NumericError("grad_check: non-finite loss");
    backward(loss);

    std::vector<Vec> analytic;
    analytic.reserve(params.size());
    for (const Tensor& p : params)
        analytic.push_back(p.has_grad() ? p.grad() : Vec::Zero(p.size()));

    double max_rel = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Vec& theta = params[pi].values_mut();
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            const double saved = theta[i];
            theta[i] = saved + h;
            double f_plus;
            {
                NoGradGuard ng;
                f_plus = f().value();
            }
            theta[i] = saved - h;
            double f_minus;
            {
                NoGradGuard ng;
                f_minus = f().value();
            }
            theta[i] = saved;
            if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
                throw NumericError("grad_check: non-finite perturbed loss");
            const double numeric = (f_plus - f_minus) / (2.0 * h);
            const double a = analytic[pi][i];
            const double denom = std::max({std::abs(a), std::abs(numeric), 1e-10});
            max_rel = std::max(max_rel, std::abs(a - numeric) / denom);
        }
    }
    return max_rel;
}

}  // namespace cfrec
