#pragma once

#include <memory>
#include <optional>
#include <variant>

#include "gasrl/agents/config.hpp"
#include "gasrl/agents/policy.hpp"
#include "gasrl/nn/adam.hpp"

namespace gasrl::agents {

// Q = V + (A - mean(A)), the identifiable value/advantage combination.
std::vector<double> dueling_q(double v, const std::vector<double>& advantages);

// Twin critics: Q1, Q2 online plus their target copies (plain heads).
struct CriticPair {
    nn::Network* online1 = nullptr;
    nn::Network* online2 = nullptr;
    nn::Network* target1 = nullptr;
    nn::Network* target2 = nullptr;
};

// argmax_a of the mean of the two online critics; ties to the lowest index.
// Returns a contract count in [-3,3].
int dqn_act(const CriticPair& pair, const env::EnvState& state);

// r + gamma * min_j targetQ_j(s', a') where a' comes from the online mean
// policy; terminal transitions return r alone.
double dqn_td_target(const CriticPair& pair, const replay::Transition& t,
                     double gamma);

// DQN family: plain / dueling critics, uniform / prioritized replay, double-Q
// clip-trick targets, symmetric twin squared TD loss.
class DqnAgent : public Learner {
public:
    DqnAgent(const AgentConfig& cfg, std::size_t obs_dim, std::uint64_t seed);

    int act(const env::EnvState& state, Rng& rng) override;
    void observe(replay::Transition t) override;
    std::size_t stored() const override;
    double learn(Rng& rng) override;
    std::vector<std::pair<std::string, nn::Network*>> named_networks() override;

    const AgentConfig& config() const { return cfg_; }

private:
    // One critic, possibly dueling (torso + V/A heads on the torso output).
    struct Critic {
        bool dueling = false;
        nn::Network q;       // plain head (sequence -> 7)
        nn::Network torso;   // dueling: sequence -> torso width
        nn::Network v_head;  // torso width -> 1
        nn::Network a_head;  // torso width -> 7

        // Q values for a batch of states; fills tapes when learning.
        nn::Matrix qvalues(const nn::SeqBatch& states, bool with_tape);
        void backward(const nn::Matrix& dq, std::vector<double>& gq,
                      std::vector<double>& gt, std::vector<double>& gv,
                      std::vector<double>& ga);
        void set_mode(nn::Mode m);

        nn::Tape tape_q, tape_torso, tape_v, tape_a;
        nn::Matrix torso_out;  // cached torso output of the last taped forward
    };

    nn::Matrix online_mean_q(const nn::SeqBatch& states);

    AgentConfig cfg_;
    Critic online_[2];
    Critic target_[2];
    struct AdamSet {
        nn::OptimizerState q, torso, v, a;
    } adam_[2];
    std::unique_ptr<replay::UniformBuffer> uniform_;
    std::unique_ptr<replay::PrioritizedBuffer> prioritized_;
};

}  // namespace gasrl::agents
