#include "gasrl/env/trading_env.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "gasrl/errors.hpp"

namespace gasrl::env {

int clamp_position(int c, int a) {
    if (a < -kMaxTrade || a > kMaxTrade)
        throw ConfigError("clamp_position: action " + std::to_string(a) +
                          " outside [-3,3]");
    if (c < -kMaxPosition || c > kMaxPosition)
        throw ConfigError("clamp_position: position " + std::to_string(c) +
                          " outside [-10,10]");
    return std::min(kMaxPosition, std::max(c + a, -kMaxPosition));
}

TradingEnv::TradingEnv(const market::MarketSeries& series,
                       const market::PcaModel& pca)
    : series_(series), pca_(pca), obs_dim_(static_cast<std::size_t>(pca.d) + 2) {
    if (pca.feature_dim() != series.feature_dim)
        throw ConfigError("trading env: PCA model dim does not match series");
}

void TradingEnv::validate_spec(const EpisodeSpec& spec,
                               const market::MarketSeries& series) {
    if (spec.start_day < kWindow - 1)
        throw ConfigError("episode start " + std::to_string(spec.start_day) +
                          " leaves fewer than 10 days of history");
    if (spec.start_day + kEpisodeLength > series.last_day())
        throw ConfigError("episode start " + std::to_string(spec.start_day) +
                          " leaves fewer than 5 days of lookahead");
}

void TradingEnv::fill_row(EnvState& s, int row, int day, int position_on_day) const {
    const auto x = market::pca_transform(pca_, series_.days[day].features);
    double* r = s.window.at(0, row);
    std::memcpy(r, x.data(), x.size() * sizeof(double));
    r[x.size()] = series_.days[day].delta;
    r[x.size() + 1] = static_cast<double>(position_on_day) / kMaxPosition;
}

EnvState TradingEnv::reset(const EpisodeSpec& spec) {
    validate_spec(spec, series_);
    EnvState s;
    s.window.resize(1, kWindow, obs_dim_);
    s.position = EpisodeSpec::initial_position;
    s.day = spec.start_day;
    s.steps_done = 0;
    s.episode_start = spec.start_day;
    // No pre-episode positions exist: the history rows carry c = 0.
    for (int row = 0; row < kWindow; ++row)
        fill_row(s, row, spec.start_day - (kWindow - 1) + row, 0);
    state_ = s;
    finished_ = false;
    return s;
}

StepResult TradingEnv::step(int action) {
    if (finished_) throw ConfigError("step: episode already finished");
    if (action < -kMaxTrade || action > kMaxTrade)
        throw ConfigError("step: action " + std::to_string(action) +
                          " outside [-3,3]");

    const int t = state_.day;
    const int c = state_.position;
    const int c_next = clamp_position(c, action);
    const double delta_next = series_.days[t + 1].delta;
    const double sigma_next = market::rolling_sigma(series_, t + 1, kWindow);
    const double reward =
        sigma_next < 1e-8 ? 0.0 : c * delta_next / sigma_next;

    StepResult res;
    res.log.day = t;
    res.log.position_before = c;
    res.log.action = action;
    res.log.delta_next = delta_next;
    res.log.sigma_next = sigma_next;
    res.log.reward = reward;
    res.log.sigma_state = market::rolling_sigma(series_, t, kWindow);

    // Slide the window one day: rows shift left, the new last row covers
    // day t+1 with the updated position.
    EnvState next = state_;
    std::memmove(next.window.at(0, 0), next.window.at(0, 1),
                 (kWindow - 1) * obs_dim_ * sizeof(double));
    next.position = c_next;
    next.day = t + 1;
    next.steps_done = state_.steps_done + 1;
    fill_row(next, kWindow - 1, t + 1, c_next);

    res.done = next.steps_done >= kEpisodeLength;
    res.reward = reward;
    res.next_state = next;
    state_ = std::move(next);
    finished_ = res.done;
    return res;
}

void write_trajectory_csv(const std::vector<TrajectoryStep>& steps,
                          const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open " + path + " for writing");
    os << "day,position_before,action,delta_next,sigma_next,reward\n";
    char buf[64];
    for (const auto& s : steps) {
        os << s.day << ',' << s.position_before << ',' << s.action;
        std::snprintf(buf, sizeof(buf), "%.17g", s.delta_next);
        os << ',' << buf;
        std::snprintf(buf, sizeof(buf), "%.17g", s.sigma_next);
        os << ',' << buf;
        std::snprintf(buf, sizeof(buf), "%.17g", s.reward);
        os << ',' << buf << "\n";
    }
    if (!os) throw DataError("write failed for " + path);
}

}  // namespace gasrl::env
