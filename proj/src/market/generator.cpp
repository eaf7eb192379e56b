#include "gasrl/market/generator.hpp"

#include <array>
#include <vector>

#include "gasrl/errors.hpp"
#include "gasrl/rng.hpp"

namespace gasrl::market {

void GeneratorConfig::validate() const {
    if (n_days < 1) throw ConfigError("generator: n_days must be >= 1");
    if (raw_dim < 1) throw ConfigError("generator: raw_dim must be >= 1");
    if (n_informative < 0 || n_informative > raw_dim)
        throw ConfigError("generator: n_informative must lie in [0, raw_dim]");
    if (!(vol_low > 0.0) || !(vol_high > 0.0))
        throw ConfigError("generator: sigma levels must be > 0");
    if (!(persistence >= 0.0 && persistence <= 1.0))
        throw ConfigError("generator: persistence must lie in [0,1]");
    if (!(noise_scale >= 0.0))
        throw ConfigError("generator: noise_scale must be >= 0");
}

namespace {

// Persistent chain step: stay with probability p, otherwise switch to one of
// the other states uniformly.
int chain_step(int state, int n_states, double persistence, gasrl::Rng& rng) {
    if (rng.uniform() < persistence || n_states == 1) return state;
    const int jump = 1 + static_cast<int>(rng.uniform_int(
                             static_cast<std::uint64_t>(n_states - 1)));
    return (state + jump) % n_states;
}

}  // namespace

MarketSeries generate_synthetic(const GeneratorConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed, "data");

    const std::array<double, 3> drifts = {cfg.drift_up, cfg.drift_flat,
                                          cfg.drift_down};
    const std::array<double, 3> drift_channel = {kDriftChannelUp, kDriftChannelFlat,
                                                 kDriftChannelDown};
    const std::array<double, 2> vols = {cfg.vol_low, cfg.vol_high};
    const std::array<double, 2> vol_channel = {kVolChannelLow, kVolChannelHigh};

    // Regime paths for days 0..n_days (one extra so day n_days-1 can leak
    // the following day's identity).
    std::vector<int> drift_regime(cfg.n_days + 1), vol_regime(cfg.n_days + 1);
    drift_regime[0] = static_cast<int>(rng.uniform_int(3));
    vol_regime[0] = static_cast<int>(rng.uniform_int(2));
    for (int t = 1; t <= cfg.n_days; ++t) {
        drift_regime[t] = chain_step(drift_regime[t - 1], 3, cfg.persistence, rng);
        vol_regime[t] = chain_step(vol_regime[t - 1], 2, cfg.persistence, rng);
    }

    const int n_drift_coords =
        cfg.n_informative == 0 ? 0 : (cfg.n_informative + 1) / 2;
    MarketSeries series;
    series.feature_dim = static_cast<std::size_t>(cfg.raw_dim);
    series.days.resize(cfg.n_days);
    for (int t = 0; t < cfg.n_days; ++t) {
        DayRecord& rec = series.days[t];
        rec.day_index = t;
        rec.delta = rng.normal(drifts[drift_regime[t]], vols[vol_regime[t]]);
        rec.features.resize(cfg.raw_dim);
        for (int i = 0; i < cfg.raw_dim; ++i) {
            if (i < n_drift_coords) {
                rec.features[i] = drift_channel[drift_regime[t + 1]] +
                                  cfg.noise_scale * rng.normal();
            } else if (i < cfg.n_informative) {
                rec.features[i] = vol_channel[vol_regime[t + 1]] +
                                  cfg.noise_scale * rng.normal();
            } else {
                rec.features[i] = rng.normal();
            }
        }
    }
    return series;
}

}  // namespace gasrl::market
