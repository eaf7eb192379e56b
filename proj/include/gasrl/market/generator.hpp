#pragma once

#include <cstdint>

#include "gasrl/market/series.hpp"

namespace gasrl::market {

// Regime-switching synthetic market. Two hidden persistent Markov chains run
// side by side: a drift chain (up / flat / down, EUR/MWh per day) and a
// volatility chain (low / high sigma). Each day,
//   delta_t ~ Normal(drift(drift_regime_t), sigma(vol_regime_t)).
// The first n_informative feature coordinates leak the NEXT day's regime
// identities (first half drift, second half volatility, encoded as +/-2 or 0)
// corrupted by noise_scale * N(0,1); the remaining coordinates are pure
// N(0,1) noise. Everything is a deterministic function of `seed`.
struct GeneratorConfig {
    int n_days = 1000;
    int raw_dim = 256;
    int n_informative = 8;
    double drift_up = 0.6;
    double drift_flat = 0.0;
    double drift_down = -0.4;
    double vol_low = 0.5;
    double vol_high = 2.0;
    double persistence = 0.9;  // P(chain stays in its current regime)
    double noise_scale = 0.5;
    std::uint64_t seed = 1;

    void validate() const;
};

MarketSeries generate_synthetic(const GeneratorConfig& cfg);

// Regime identity channel values used by the generator, exposed so tests
// can decode regimes from noise-free features.
constexpr double kDriftChannelUp = 2.0;
constexpr double kDriftChannelFlat = 0.0;
constexpr double kDriftChannelDown = -2.0;
constexpr double kVolChannelLow = -2.0;
constexpr double kVolChannelHigh = 2.0;

}  // namespace gasrl::market
