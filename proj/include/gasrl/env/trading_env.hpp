#pragma once

#include <string>
#include <vector>

#include "gasrl/market/pca.hpp"
#include "gasrl/market/series.hpp"
#include "gasrl/nn/tensor.hpp"

namespace gasrl::env {

constexpr int kWindow = 10;        // encoded observations per state
constexpr int kMaxPosition = 10;   // |c_t| bound, in contracts
constexpr int kMaxTrade = 3;       // |a_t| bound, in contracts
constexpr int kEpisodeLength = 5;  // business days per episode
constexpr int kNumActions = 2 * kMaxTrade + 1;

// Discount factor of the trading MDP.
constexpr double discount() { return 0.9; }

// Action index <-> contract count. Index 0 is action -3; ties everywhere
// break toward the lowest index.
constexpr int action_from_index(int idx) { return idx - kMaxTrade; }
constexpr int index_from_action(int a) { return a + kMaxTrade; }

// c_{t+1} = min(10, max(c_t + a_t, -10)). Throws on out-of-range inputs.
int clamp_position(int c, int a);

// A state is the 10-step window of encoded observations ending at `day`.
// Each window row is [pca features (d), delta, position/10]; rows covering
// days before the episode start carry position 0.
struct EnvState {
    nn::SeqBatch window;  // batch=1, steps=kWindow, dim=d+2
    int position = 0;
    int day = 0;              // day index of the window's last row
    int steps_done = 0;       // steps taken in the episode so far
    int episode_start = 0;

    std::size_t dim() const { return window.dim; }
};

struct EpisodeSpec {
    int start_day = 0;
    static constexpr int length = kEpisodeLength;
    static constexpr int initial_position = 0;
};

// One row of the trajectory log.
struct TrajectoryStep {
    int day = 0;
    int position_before = 0;
    int action = 0;
    double delta_next = 0.0;
    double sigma_next = 0.0;
    double reward = 0.0;
    double sigma_state = 0.0;  // rolling sigma at the state's own day (not in the CSV)
};

struct StepResult {
    EnvState next_state;
    double reward = 0.0;
    bool done = false;
    TrajectoryStep log;
};

// The futures-trading MDP. The series and PCA model are shared read-only;
// one environment instance serves one rollout at a time.
class TradingEnv {
public:
    TradingEnv(const market::MarketSeries& series, const market::PcaModel& pca);

    // Episode start requires 10 days of history (start_day >= 9) and 5 days
    // of lookahead within the series.
    EnvState reset(const EpisodeSpec& spec);

    // Applies the action to the current state. Reward is
    // c_t * delta_{t+1} / sigma_{t+1} with sigma_{t+1} the rolling standard
    // deviation of the 10 deltas ending at day t+1; a window flatter than
    // 1e-8 yields reward 0.
    StepResult step(int action);

    const EnvState& state() const { return state_; }
    bool finished() const { return finished_; }
    std::size_t obs_dim() const { return obs_dim_; }

    static void validate_spec(const EpisodeSpec& spec,
                              const market::MarketSeries& series);

private:
    void fill_row(EnvState& s, int row, int day, int position_on_day) const;

    const market::MarketSeries& series_;
    const market::PcaModel& pca_;
    std::size_t obs_dim_;
    EnvState state_;
    bool finished_ = true;
};

// Writes rows in the documented CSV schema:
// day,position_before,action,delta_next,sigma_next,reward
void write_trajectory_csv(const std::vector<TrajectoryStep>& steps,
                          const std::string& path);

}  // namespace gasrl::env
