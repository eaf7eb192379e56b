#pragma once

#include <cstdint>
#include <vector>

namespace gasrl::nn {

// Adam accumulator state, shaped like the parameter vector it updates.
struct OptimizerState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::uint64_t step_count = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    OptimizerState() = default;
    OptimizerState(std::size_t n, double lr)
        : first_moment(n, 0.0), second_moment(n, 0.0), learning_rate(lr) {}
};

// One bias-corrected Adam update in place. Rejects non-finite gradients
// (NumericFault) without touching params or state.
void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               OptimizerState& opt);

}  // namespace gasrl::nn
