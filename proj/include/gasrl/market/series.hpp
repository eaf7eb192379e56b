#pragma once

#include <string>
#include <vector>

namespace gasrl::market {

// One business day: raw feature vector o_t and the front-month price
// difference delta_t (EUR/MWh) between day t and t-1.
struct DayRecord {
    int day_index = 0;
    std::vector<double> features;
    double delta = 0.0;
};

// Inclusive day-index interval.
struct DayRange {
    int first = 0;
    int last = 0;

    int length() const { return last - first + 1; }
    bool contains(int day) const { return day >= first && day <= last; }
};

struct MarketSeries {
    std::size_t feature_dim = 0;
    std::vector<DayRecord> days;

    std::size_t size() const { return days.size(); }
    int last_day() const { return days.empty() ? -1 : days.back().day_index; }
    void validate() const;  // contiguous day indices, uniform feature dim
};

// CSV schema (bit-exact contract): header `day,delta,f0,...,f{F-1}`, one row
// per business day, '.' decimal separator, floats emitted with 17 significant
// digits so a write/load round-trip is exact.
MarketSeries load_csv(const std::string& path);
void save_csv(const MarketSeries& series, const std::string& path);

// Population standard deviation of the `window` deltas ending at day t
// (delta_{t-window+1} .. delta_t). Requires t >= window - 1.
double rolling_sigma(const MarketSeries& series, int t, int window = 10);

}  // namespace gasrl::market
