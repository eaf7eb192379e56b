#pragma once

#include <vector>

#include "gasrl/market/series.hpp"

namespace gasrl::market {

// PCA encoder fitted on a training day range. Components are stored
// column-orthonormal as a flat (F x d) row-major matrix; eigenvalues are the
// explained variances in descending order.
struct PcaModel {
    std::vector<double> mean;        // dim F
    std::vector<double> components;  // F x d, row-major; column k = component k
    int d = 0;
    std::vector<double> eigenvalues;

    std::size_t feature_dim() const { return mean.size(); }
    double component(std::size_t row, int col) const {
        return components[row * d + col];
    }
    void validate() const;
};

// Fit by iterated power method with deflation on the sample covariance of
// days [first_day, last_day] inclusive. Convergence tolerance 1e-10, at most
// 10,000 iterations per component. Sign convention: the largest-magnitude
// coordinate of every component is positive.
PcaModel pca_fit(const MarketSeries& series, int first_day, int last_day, int d);

// components^T * (o - mean).
std::vector<double> pca_transform(const PcaModel& model,
                                  const std::vector<double>& o);

// mean + components * x (maps a reduced vector back to feature space).
std::vector<double> pca_inverse(const PcaModel& model,
                                const std::vector<double>& x);

// Binary little-endian serialization; round-trips bitwise.
void save_pca(const PcaModel& model, const std::string& path);
PcaModel load_pca(const std::string& path);

}  // namespace gasrl::market
