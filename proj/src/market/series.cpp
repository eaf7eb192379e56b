#include "gasrl/market/series.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gasrl/errors.hpp"

namespace gasrl::market {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, std::size_t line_no, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw DataError("csv line " + std::to_string(line_no) + ": bad " + what +
                        " value '" + s + "'");
    }
}

}  // namespace

void MarketSeries::validate() const {
    if (!days.empty() && days[0].day_index != 0)
        throw DataError("series: day indices must start at 0");
    for (std::size_t i = 0; i < days.size(); ++i) {
        if (days[i].features.size() != feature_dim)
            throw DataError("series: feature dim mismatch at day " +
                            std::to_string(days[i].day_index));
        if (i > 0 && days[i].day_index != days[i - 1].day_index + 1)
            throw DataError("series: day indices not contiguous at position " +
                            std::to_string(i));
    }
}

MarketSeries load_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open market data file " + path);

    std::string line;
    if (!std::getline(is, line)) throw DataError(path + ": empty file");
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "day" || header[1] != "delta")
        throw DataError(path + ": header must start with day,delta,f0,...");
    const std::size_t feature_dim = header.size() - 2;
    for (std::size_t i = 0; i < feature_dim; ++i) {
        if (header[2 + i] != "f" + std::to_string(i))
            throw DataError(path + ": feature column " + std::to_string(i) +
                            " is named '" + header[2 + i] + "', expected f" +
                            std::to_string(i));
    }

    MarketSeries series;
    series.feature_dim = feature_dim;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw DataError("csv line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " columns, found " +
                            std::to_string(cells.size()));
        DayRecord rec;
        rec.day_index =
            static_cast<int>(parse_double(cells[0], line_no, "day index"));
        rec.delta = parse_double(cells[1], line_no, "delta");
        rec.features.resize(feature_dim);
        for (std::size_t i = 0; i < feature_dim; ++i)
            rec.features[i] = parse_double(cells[2 + i], line_no, "feature");
        if (series.days.empty()) {
            if (rec.day_index != 0)
                throw DataError("csv line " + std::to_string(line_no) +
                                ": day indices must start at 0");
        } else if (rec.day_index != series.days.back().day_index + 1) {
            throw DataError("csv line " + std::to_string(line_no) +
                            ": day index " + std::to_string(rec.day_index) +
                            " does not follow " +
                            std::to_string(series.days.back().day_index));
        }
        series.days.push_back(std::move(rec));
    }
    if (series.days.empty()) throw DataError(path + ": no data rows");
    return series;
}

void save_csv(const MarketSeries& series, const std::string& path) {
    series.validate();
    std::ofstream os(path);
    if (!os) throw DataError("cannot open " + path + " for writing");
    os << "day,delta";
    for (std::size_t i = 0; i < series.feature_dim; ++i) os << ",f" << i;
    os << "\n";
    char buf[64];
    for (const auto& day : series.days) {
        os << day.day_index;
        std::snprintf(buf, sizeof(buf), "%.17g", day.delta);
        os << ',' << buf;
        for (const double f : day.features) {
            std::snprintf(buf, sizeof(buf), "%.17g", f);
            os << ',' << buf;
        }
        os << "\n";
    }
    if (!os) throw DataError("write failed for " + path);
}

double rolling_sigma(const MarketSeries& series, int t, int window) {
    if (window < 1) throw ConfigError("rolling_sigma: window must be >= 1");
    if (t < window - 1)
        throw DataError("rolling_sigma: insufficient history at day " +
                        std::to_string(t));
    if (t >= static_cast<int>(series.size()))
        throw DataError("rolling_sigma: day " + std::to_string(t) +
                        " beyond series end");
    double mean = 0.0;
    for (int i = t - window + 1; i <= t; ++i) mean += series.days[i].delta;
    mean /= window;
    double var = 0.0;
    for (int i = t - window + 1; i <= t; ++i) {
        const double d = series.days[i].delta - mean;
        var += d * d;
    }
    return std::sqrt(var / window);
}

}  // namespace gasrl::market
