#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gasrl/env/trading_env.hpp"
#include "gasrl/nn/network.hpp"
#include "gasrl/replay/buffer.hpp"
#include "gasrl/rng.hpp"

namespace gasrl::agents {

// Greedy action source used for both training rollouts and evaluation.
// The rng is consumed only by sampling policies (IQN).
class TradingPolicy {
public:
    virtual ~TradingPolicy() = default;
    virtual int act(const env::EnvState& state, Rng& rng) = 0;
};

// A policy that also learns from replayed transitions.
class Learner : public TradingPolicy {
public:
    virtual void observe(replay::Transition t) = 0;
    virtual std::size_t stored() const = 0;
    // One gradient step (sampling its own replay) + target soft updates.
    virtual double learn(Rng& rng) = 0;
    // Stable (name, network) listing for checkpoints; online parts first.
    virtual std::vector<std::pair<std::string, nn::Network*>> named_networks() = 0;
};

// Index of the largest score; ties break toward the lowest index.
int argmax_lowest(const std::vector<double>& scores);

// With probability epsilon a uniformly random action from the 7-action set,
// otherwise base_action.
int epsilon_greedy(int base_action, double epsilon, Rng& rng);

// Stacks state windows into one batch for the networks.
nn::SeqBatch pack_states(const std::vector<const env::EnvState*>& states);

}  // namespace gasrl::agents
