#pragma once

#include <functional>
#include <memory>

#include "gasrl/agents/config.hpp"
#include "gasrl/agents/policy.hpp"
#include "gasrl/nn/adam.hpp"

namespace gasrl::agents {

// Implicit quantile tower T(s, a, beta) = f(psi(s) .* phi(beta))_a:
//   psi — sequence network producing the state embedding,
//   phi — one dense layer over the cosine features (cos(pi*beta) ... cos(n*pi*beta)),
//   f   — head mapping the Hadamard product to one value per action.
struct IqnTower {
    nn::Network psi;
    nn::Network phi;
    nn::Network f;
    std::size_t embedding_dim = 0;

    IqnTower() = default;
    IqnTower(const AgentConfig& cfg, std::size_t obs_dim, std::uint64_t seed);

    void set_mode(nn::Mode m);

    // cos(k*pi*beta) for k = 1..embedding_dim.
    void cos_features(double beta, double* out) const;

    // T(s, a, beta) for every action: one state row of psi output against a
    // list of betas. Rows of the result follow the beta order.
    nn::Matrix values_for_state(const env::EnvState& state,
                                const std::vector<double>& betas);
};

// Sampling-policy kernel: draw K betas uniform on (0, alpha], average the
// per-action scores returned by `eval`, pick the argmax (ties lowest).
// `eval(beta, scores)` must fill scores with T(s, ., beta).
int iqn_act_kernel(
    const std::function<void(double, std::vector<double>&)>& eval,
    int n_actions, int K, double alpha, Rng& rng);

struct IqnLossResult {
    double loss = 0.0;
    std::vector<double> g_psi, g_phi, g_f;
};

// Quantile-Huber loss over sampled quantile levels, Eq-style
// (1/N') sum_i sum_j rho^kappa_{beta_i}(r + gamma*T_target(s',a*,beta_j)
//                                        - T_online(s,a,beta_i)),
// batch-averaged. a* comes from K policy samples on the online tower
// (levels uniform on (0, alpha] when alpha < 1 and risk_adjusted is set).
IqnLossResult iqn_loss(IqnTower& online, IqnTower& target,
                       const std::vector<const replay::Transition*>& batch,
                       int n, int n_prime, int k_policy, double kappa,
                       double gamma, double alpha, bool risk_adjusted, Rng& rng);

// Deterministic variant with caller-supplied quantile levels (row b holds the
// levels for transition b). Used by iqn_loss after sampling.
IqnLossResult iqn_loss_with_betas(IqnTower& online, IqnTower& target,
                                  const std::vector<const replay::Transition*>& batch,
                                  const nn::Matrix& betas_online,
                                  const nn::Matrix& betas_target,
                                  const nn::Matrix& betas_policy, double kappa,
                                  double gamma);

class IqnAgent : public Learner {
public:
    IqnAgent(const AgentConfig& cfg, std::size_t obs_dim, std::uint64_t seed);

    int act(const env::EnvState& state, Rng& rng) override;
    void observe(replay::Transition t) override;
    std::size_t stored() const override;
    double learn(Rng& rng) override;
    std::vector<std::pair<std::string, nn::Network*>> named_networks() override;

    IqnTower& tower() { return online_; }

private:
    AgentConfig cfg_;
    IqnTower online_;
    IqnTower target_;
    nn::OptimizerState adam_psi_, adam_phi_, adam_f_;
    std::unique_ptr<replay::UniformBuffer> buffer_;
};

}  // namespace gasrl::agents
