#pragma once

#include <memory>
#include <optional>

#include "gasrl/agents/config.hpp"
#include "gasrl/agents/extra_trees.hpp"
#include "gasrl/agents/policy.hpp"
#include "gasrl/market/pca.hpp"

namespace gasrl::agents {

std::unique_ptr<Learner> make_learner(const AgentConfig& cfg, std::size_t obs_dim,
                                      std::uint64_t seed);

struct TrainLogStep {
    std::size_t step = 0;
    double epsilon = 0.0;
    double loss = 0.0;
    bool learned = false;  // false while the buffer is below min_fill
};

struct EpisodeLogEntry {
    int start_day = 0;
    double undiscounted_return = 0.0;
};

struct TrainResult {
    AgentConfig config;
    std::shared_ptr<Learner> learner;           // RL kinds
    std::shared_ptr<ExtraTreesModel> trees;     // extra_trees
    std::vector<TrainLogStep> steps;
    std::vector<EpisodeLogEntry> episodes;

    // Evaluation-ready greedy policy. The series is needed by the
    // Extra-Trees policy, which reads raw features by day index.
    std::unique_ptr<TradingPolicy> make_policy(
        const market::MarketSeries& series) const;
};

// Linear decay epsilon_start -> epsilon_end over the first
// `epsilon_fraction` share of train_steps, flat afterwards.
double epsilon_at(const AgentConfig& cfg, std::size_t step);

// Interleaved environment/learning loop over uniformly sampled training
// episodes. Fully deterministic given (cfg, series, pca, train_range, seed).
// For extra_trees this fits the forest on the training range instead and
// `pca` may be null; RL kinds require it.
TrainResult train(const AgentConfig& cfg, const market::MarketSeries& series,
                  const market::PcaModel* pca, const market::DayRange& train_range,
                  std::uint64_t master_seed);

// Agent checkpoint directory: one nn_core parameter file per network part
// (or the serialized forest), the PCA encoder, and a plain-text config echo.
void save_checkpoint(const TrainResult& result, const market::PcaModel* pca,
                     const std::string& dir);

struct LoadedAgent {
    AgentConfig config;
    std::shared_ptr<Learner> learner;
    std::shared_ptr<ExtraTreesModel> trees;
    market::PcaModel pca;

    std::unique_ptr<TradingPolicy> make_policy(
        const market::MarketSeries& series) const;
};

LoadedAgent load_checkpoint(const std::string& dir);

// Always-long-max and always-flat reference policies.
std::unique_ptr<TradingPolicy> make_constant_policy(int action);

}  // namespace gasrl::agents
