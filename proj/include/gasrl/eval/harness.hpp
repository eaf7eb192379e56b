#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gasrl/agents/config.hpp"
#include "gasrl/agents/policy.hpp"
#include "gasrl/market/pca.hpp"

namespace gasrl::eval {

struct ExperimentSplit {
    market::DayRange train;
    market::DayRange test;
};

// Walk-forward splits: the last n non-overlapping `test_days`-day windows
// become test ranges; each experiment trains on every day before its window.
std::vector<ExperimentSplit> make_splits(const market::MarketSeries& series,
                                         int n_experiments = 4,
                                         int test_days = 90);

// Non-overlapping 5-day episode start days tiling a test range. An episode
// whose final reward would need a price difference beyond the series end is
// dropped.
std::vector<int> episode_starts(const market::MarketSeries& series,
                                const market::DayRange& test);

struct SigmaCalibration {
    double sigma_hat = 0.0;
    double achieved_fraction = 0.0;  // risky fraction of the riskiest policy
    bool reachable = true;
    std::size_t riskiest_risky_count = 0;
    std::vector<env::TrajectoryStep> riskiest_trajectory;
};

// Simulates the riskiest policy (always +3, episode reset to c = 0) over the
// test range and picks the largest threshold whose risky fraction
// (|c| >= 7 and sigma > threshold) stays >= 0.38. If even counting every
// sigma the |c| >= 7 fraction misses 0.38, reports the achievable maximum
// and falls back to the smallest observed sigma.
SigmaCalibration calibrate_sigma_hat(const market::MarketSeries& series,
                                     const market::PcaModel& pca,
                                     const ExperimentSplit& split);

struct RiskyStats {
    std::size_t risky_count = 0;
    double fraction = 0.0;  // risky states / visited states
    double ratio = 0.0;     // risky states / riskiest policy's risky states
};

RiskyStats risky_state_pct(const std::vector<env::TrajectoryStep>& trajectory,
                           double sigma_hat, std::size_t riskiest_risky_count);

struct EvalReport {
    double pnl = 0.0;
    double risky_pct = 0.0;
    double risky_ratio = 0.0;
    double sigma_hat = 0.0;
    bool sigma_hat_reachable = true;
    std::size_t n_states = 0;
    std::vector<env::TrajectoryStep> trajectory;
    std::string config_echo;
    std::uint64_t seed = 0;
};

// Greedy rollout over the tiled test episodes: accumulates
// P&L = sum_t c_t * delta_{t+1} and the risky-state metrics against the
// per-split sigma_hat calibration.
EvalReport run_test(agents::TradingPolicy& policy,
                    const market::MarketSeries& series,
                    const market::PcaModel& pca, const ExperimentSplit& split,
                    Rng& rng, const std::string& config_echo = "",
                    std::uint64_t seed = 0);

struct AblationRow {
    double alpha = 0.0;
    int split_index = 0;
    std::uint64_t seed = 0;
    double pnl = 0.0;
    double risky_pct = 0.0;
    double risky_ratio = 0.0;
};

struct AblationTable {
    std::vector<AblationRow> rows;  // alpha-major, then split, then seed
    std::vector<double> alphas;
    std::vector<double> mean_pnl;         // per alpha
    std::vector<double> mean_risky_pct;   // per alpha
    std::vector<double> mean_risky_ratio; // per alpha
};

// One trained agent per (alpha, split, seed) with shared hyperparameters;
// runs are independent and may execute on `jobs` threads. PCA models are
// fitted per split on the training range only.
AblationTable run_ablation(agents::AgentKind kind,
                           const std::vector<double>& alphas,
                           const std::vector<ExperimentSplit>& splits,
                           const std::vector<std::uint64_t>& seeds,
                           const agents::AgentConfig& base_cfg,
                           const market::MarketSeries& series, int pca_dim,
                           int jobs = 1);

void write_ablation_csv(const AblationTable& table, const std::string& path);
void write_ablation_summary_csv(const AblationTable& table,
                                const std::string& path);

}  // namespace gasrl::eval
