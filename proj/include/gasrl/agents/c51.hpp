#pragma once

#include <memory>

#include "gasrl/agents/config.hpp"
#include "gasrl/agents/policy.hpp"
#include "gasrl/nn/adam.hpp"
#include "gasrl/risk/risk.hpp"

namespace gasrl::agents {

// Per-action return distribution read off a categorical head output row
// (action-major groups of n_atoms probabilities).
risk::CategoricalValueDistribution c51_distribution(const nn::Matrix& probs,
                                                    std::size_t row, int action_idx,
                                                    const risk::AtomGrid& grid);

// argmax_a CVaR_alpha of the predicted distribution; alpha = 1 uses the plain
// expectation (identical arithmetic to the risk-neutral policy).
int c51_act(nn::Network& net, const env::EnvState& state,
            const risk::AtomGrid& grid, double alpha);

struct DistLoss {
    double loss = 0.0;
    std::vector<double> grads;  // d loss / d online params
};

// Cross-entropy loss between the projected target distribution and the online
// prediction at the taken action, averaged over the batch. The greedy action
// a* on the next state comes from the online network: risk-neutral for
// alpha = 1, CVaR_alpha-greedy when alpha < 1 and risk_adjusted is set.
// Terminal transitions project with gamma = 0.
DistLoss c51_loss(nn::Network& online, nn::Network& target,
                  const std::vector<const replay::Transition*>& batch,
                  const risk::AtomGrid& grid, double gamma, double alpha = 1.0,
                  bool risk_adjusted = true);

class C51Agent : public Learner {
public:
    C51Agent(const AgentConfig& cfg, std::size_t obs_dim, std::uint64_t seed);

    int act(const env::EnvState& state, Rng& rng) override;
    void observe(replay::Transition t) override;
    std::size_t stored() const override;
    double learn(Rng& rng) override;
    std::vector<std::pair<std::string, nn::Network*>> named_networks() override;

    const risk::AtomGrid& grid() const { return grid_; }

private:
    AgentConfig cfg_;
    risk::AtomGrid grid_;
    nn::Network online_;
    nn::Network target_;
    nn::OptimizerState adam_;
    std::unique_ptr<replay::UniformBuffer> buffer_;
};

}  // namespace gasrl::agents
