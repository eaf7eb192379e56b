#pragma once

#include <memory>

#include "gasrl/agents/config.hpp"
#include "gasrl/agents/policy.hpp"
#include "gasrl/nn/adam.hpp"
#include "gasrl/risk/risk.hpp"

namespace gasrl::agents {

// argmax over the per-action CVaR estimator. For alpha < 1 the L quantile
// outputs of each action are sorted ascending before the truncated mean
// (network outputs are not guaranteed monotone); alpha = 1 takes the plain
// mean of the raw outputs, matching the risk-neutral policy exactly.
int qrdqn_act(nn::Network& net, const env::EnvState& state, int n_quantiles,
              double alpha);

struct DistLossQr {
    double loss = 0.0;
    std::vector<double> grads;
};

// Quantile-Huber regression of the online quantiles against the pairwise
// targets r + gamma * targetT(s', a*)_j, a* chosen by the online policy
// (risk-adjusted when alpha < 1 and risk_adjusted is set). Loss is
// sum_i mean_j rho^kappa_{tau_hat_i}(u_ij), batch-averaged; terminal
// transitions collapse every target to r.
DistLossQr qrdqn_loss(nn::Network& online, nn::Network& target,
                      const std::vector<const replay::Transition*>& batch,
                      int n_quantiles, double kappa, double gamma,
                      double alpha = 1.0, bool risk_adjusted = true);

class QrDqnAgent : public Learner {
public:
    QrDqnAgent(const AgentConfig& cfg, std::size_t obs_dim, std::uint64_t seed);

    int act(const env::EnvState& state, Rng& rng) override;
    void observe(replay::Transition t) override;
    std::size_t stored() const override;
    double learn(Rng& rng) override;
    std::vector<std::pair<std::string, nn::Network*>> named_networks() override;

private:
    AgentConfig cfg_;
    nn::Network online_;
    nn::Network target_;
    nn::OptimizerState adam_;
    std::unique_ptr<replay::UniformBuffer> buffer_;
};

}  // namespace gasrl::agents
