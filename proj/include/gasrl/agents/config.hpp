#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gasrl::agents {

enum class AgentKind {
    kDqn,
    kPrioritizedDqn,
    kDuelingDqn,
    kPrioritizedDuelingDqn,
    kC51,
    kQrDqn,
    kIqn,
    kExtraTrees,
};

// kPaper carries the architectures and optimizer settings of the original
// agents; kDesk shrinks every unit count by 4x for fast runs and tests.
enum class PresetScale { kPaper, kDesk };

const char* to_string(AgentKind kind);
AgentKind agent_kind_from_string(const std::string& s);
const char* to_string(PresetScale scale);
PresetScale preset_from_string(const std::string& s);

struct AgentConfig {
    AgentKind kind = AgentKind::kDqn;
    double alpha = 1.0;  // CVaR confidence level; 1 = risk-neutral
    PresetScale preset = PresetScale::kDesk;

    // Network shape (torso for dueling kinds, psi for IQN).
    std::vector<std::size_t> recurrent_units;
    std::vector<std::size_t> dense_units;
    std::vector<std::size_t> head_units;  // dueling V/A heads
    std::size_t psi_out = 0;              // IQN state-embedding width
    std::size_t embedding_dim = 0;        // IQN cosine embedding size n
    std::size_t f_hidden = 0;             // IQN head hidden width

    double learning_rate = 1e-4;
    std::size_t batch_size = 32;
    double tau = 0.995;  // target <- tau*target + (1-tau)*online, per gradient step
    double dropout = 0.3;
    bool layer_norm = false;

    int n_atoms = 51;  // C51
    double v_min = -150.0;
    double v_max = 150.0;
    int n_quantiles = 51;  // QR-DQN L
    int iqn_n = 64;
    int iqn_n_prime = 32;
    int iqn_k = 64;
    double kappa = 1.0;

    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double epsilon_fraction = 0.3;  // share of train_steps spent decaying

    std::size_t replay_capacity = 100000;
    std::size_t min_fill = 1000;
    std::size_t train_steps = 20000;

    // Use the CVaR-adjusted greedy action when forming training targets for
    // alpha < 1 (set false to always use the risk-neutral greedy action).
    bool risk_adjusted_target_action = true;

    // Extra-Trees settings; symmetric_tree_actions maps prediction 0 to -3
    // instead of the literal a = 3*y (which holds on a predicted fall).
    int n_trees = 100;
    int min_samples_split = 2;
    bool symmetric_tree_actions = false;

    static AgentConfig preset_for(AgentKind kind, double alpha, PresetScale scale);
    void validate() const;

    // Deterministic key=value echo; parse_echo() round-trips it.
    std::string echo() const;
    static AgentConfig parse_echo(const std::string& text);
};

}  // namespace gasrl::agents
