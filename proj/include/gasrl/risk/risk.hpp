#pragma once

#include <vector>

namespace gasrl::risk {

// Fixed evenly spaced support for categorical return distributions:
// atom_j = v_min + j * dz, dz = (v_max - v_min) / (n_atoms - 1).
struct AtomGrid {
    double v_min = -150.0;
    double v_max = 150.0;
    int n_atoms = 51;

    void validate() const;
    double dz() const { return (v_max - v_min) / (n_atoms - 1); }
    double atom(int j) const { return v_min + j * dz(); }
};

// Probability vector over an atom grid.
struct CategoricalValueDistribution {
    AtomGrid grid;
    std::vector<double> probs;

    void validate() const;  // length, nonnegativity, sum within 1e-9 of 1
    double mean() const;
};

// L quantile estimates at implicit levels tau_i = i/L, i = 1..L.
// Values are stored in level order; monotonicity is not imposed because
// network outputs may cross.
struct QuantileSet {
    std::vector<double> values;
};

// Exact lower CVaR of the discrete distribution at confidence level
// alpha in (0,1]: (1/alpha) * sum_i z_i * (min(c_i, alpha) - min(c_{i-1}, alpha))
// over cumulative masses c_i. alpha = 1 returns the mean.
// With `truncated_compat` the boundary-overcounting truncated estimator
// (1/alpha) * sum_{z_i <= q_alpha} z_i p_i is used instead.
double cvar_categorical(const CategoricalValueDistribution& dist, double alpha,
                        bool truncated_compat = false);

// Smallest atom whose cumulative mass reaches alpha, alpha in (0,1).
double var_categorical(const CategoricalValueDistribution& dist, double alpha);

// Truncated-mean CVaR estimator over the first floor(alpha*L) quantile
// values, divided by alpha*L. alpha = 1 returns the plain mean. Requires
// alpha*L >= 1 so at least one quantile falls below the cutoff.
double cvar_quantiles(const QuantileSet& q, double alpha);

// Distributional Bellman backup onto a fixed grid: shift every atom by
// reward + gamma * z_j, clip into [v_min, v_max], and split each atom's mass
// between the two nearest grid points proportionally to proximity (an exact
// hit keeps all mass on one atom). Output sums to 1.
// `legacy_weight_order` swaps the two interpolation weights (the inverted
// assignment some published pseudocode uses); default is the
// expectation-consistent order.
std::vector<double> project_categorical(double reward, double gamma,
                                        const CategoricalValueDistribution& source,
                                        bool legacy_weight_order = false);

// -sum_i m_i * log(max(p_i, 1e-12)).
double cross_entropy(const std::vector<double>& target_m,
                     const std::vector<double>& predicted);

// Quantile Huber loss |tau - 1{u<0}| * L_kappa(u) / kappa with
// L_kappa(u) = u^2/2 for |u| <= kappa, kappa*(|u| - kappa/2) otherwise.
double quantile_huber(double u, double tau, double kappa);

// d/du of quantile_huber, used by the quantile-regression losses.
double quantile_huber_grad(double u, double tau, double kappa);

}  // namespace gasrl::risk
