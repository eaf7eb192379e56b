#include "gasrl/nn/adam.hpp"

#include <cmath>
#include <string>

#include "gasrl/errors.hpp"

namespace gasrl::nn {

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               OptimizerState& opt) {
    if (params.size() != grads.size() || params.size() != opt.first_moment.size() ||
        params.size() != opt.second_moment.size())
        throw ConfigError("adam_step: shape mismatch");
    for (std::size_t i = 0; i < grads.size(); ++i)
        if (!std::isfinite(grads[i]))
            throw NumericFault("adam_step: non-finite gradient at index " +
                               std::to_string(i));

    opt.step_count += 1;
    const double b1 = opt.beta1, b2 = opt.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(opt.step_count));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(opt.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        double& m = opt.first_moment[i];
        double& v = opt.second_moment[i];
        m = b1 * m + (1.0 - b1) * grads[i];
        v = b2 * v + (1.0 - b2) * grads[i] * grads[i];
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        params[i] -= opt.learning_rate * m_hat / (std::sqrt(v_hat) + opt.epsilon);
    }
}

}  // namespace gasrl::nn
