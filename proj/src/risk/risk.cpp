#include "gasrl/risk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gasrl/errors.hpp"

namespace gasrl::risk {

void AtomGrid::validate() const {
    if (!(v_min < v_max)) throw ConfigError("atom grid: v_min must be < v_max");
    if (n_atoms < 2) throw ConfigError("atom grid: need at least 2 atoms");
}

void CategoricalValueDistribution::validate() const {
    grid.validate();
    if (probs.size() != static_cast<std::size_t>(grid.n_atoms))
        throw ConfigError("categorical distribution: prob vector length " +
                          std::to_string(probs.size()) + " != n_atoms " +
                          std::to_string(grid.n_atoms));
    double sum = 0.0;
    for (const double p : probs) {
        if (!(p >= 0.0))
            throw ConfigError("categorical distribution: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw ConfigError("categorical distribution: probabilities sum to " +
                          std::to_string(sum));
}

double CategoricalValueDistribution::mean() const {
    double m = 0.0;
    for (int j = 0; j < grid.n_atoms; ++j) m += grid.atom(j) * probs[j];
    return m;
}

double cvar_categorical(const CategoricalValueDistribution& dist, double alpha,
                        bool truncated_compat) {
    dist.validate();
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ConfigError("cvar_categorical: alpha must lie in (0,1]");
    if (alpha == 1.0) return dist.mean();

    if (truncated_compat) {
        // Boundary atom fully counted once the cumulative mass crosses alpha.
        double cum = 0.0, acc = 0.0;
        for (int j = 0; j < dist.grid.n_atoms; ++j) {
            acc += dist.grid.atom(j) * dist.probs[j];
            cum += dist.probs[j];
            if (cum >= alpha) break;
        }
        return acc / alpha;
    }

    double cum_prev = 0.0, acc = 0.0;
    for (int j = 0; j < dist.grid.n_atoms; ++j) {
        const double cum = cum_prev + dist.probs[j];
        acc += dist.grid.atom(j) *
               (std::min(cum, alpha) - std::min(cum_prev, alpha));
        cum_prev = cum;
        if (cum_prev >= alpha) break;
    }
    return acc / alpha;
}

double var_categorical(const CategoricalValueDistribution& dist, double alpha) {
    dist.validate();
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("var_categorical: alpha must lie in (0,1)");
    double cum = 0.0;
    for (int j = 0; j < dist.grid.n_atoms; ++j) {
        cum += dist.probs[j];
        if (cum >= alpha) return dist.grid.atom(j);
    }
    return dist.grid.atom(dist.grid.n_atoms - 1);
}

double cvar_quantiles(const QuantileSet& q, double alpha) {
    const std::size_t l = q.values.size();
    if (l == 0) throw ConfigError("cvar_quantiles: empty quantile set");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ConfigError("cvar_quantiles: alpha must lie in (0,1]");
    if (alpha == 1.0) {
        double sum = 0.0;
        for (const double v : q.values) sum += v;
        return sum / static_cast<double>(l);
    }
    const double al = alpha * static_cast<double>(l);
    const auto k = static_cast<std::size_t>(std::floor(al + 1e-9));
    if (k < 1)
        throw ConfigError("cvar_quantiles: confidence level unresolvable at this L");
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += q.values[i];
    return sum / al;
}

std::vector<double> project_categorical(double reward, double gamma,
                                        const CategoricalValueDistribution& source,
                                        bool legacy_weight_order) {
    source.validate();
    if (!std::isfinite(reward))
        throw ConfigError("project_categorical: non-finite reward");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw ConfigError("project_categorical: gamma must lie in [0,1)");

    const AtomGrid& g = source.grid;
    const double dz = g.dz();
    std::vector<double> m(g.n_atoms, 0.0);
    for (int j = 0; j < g.n_atoms; ++j) {
        const double p = source.probs[j];
        const double tz = std::clamp(reward + gamma * g.atom(j), g.v_min, g.v_max);
        const double b = (tz - g.v_min) / dz;
        auto lo = static_cast<int>(std::floor(b));
        auto hi = static_cast<int>(std::ceil(b));
        lo = std::clamp(lo, 0, g.n_atoms - 1);
        hi = std::clamp(hi, 0, g.n_atoms - 1);
        if (lo == hi) {
            m[lo] += p;
        } else if (legacy_weight_order) {
            m[lo] += p * (b - lo);
            m[hi] += p * (hi - b);
        } else {
            m[lo] += p * (hi - b);
            m[hi] += p * (b - lo);
        }
    }
    return m;
}

double cross_entropy(const std::vector<double>& target_m,
                     const std::vector<double>& predicted) {
    if (target_m.size() != predicted.size())
        throw ConfigError("cross_entropy: length mismatch");
    double loss = 0.0;
    for (std::size_t i = 0; i < target_m.size(); ++i)
        loss -= target_m[i] * std::log(std::max(predicted[i], 1e-12));
    return loss;
}

double quantile_huber(double u, double tau, double kappa) {
    if (!(kappa > 0.0)) throw ConfigError("quantile_huber: kappa must be > 0");
    const double weight = std::abs(tau - (u < 0.0 ? 1.0 : 0.0));
    const double au = std::abs(u);
    const double huber = au <= kappa ? 0.5 * u * u : kappa * (au - 0.5 * kappa);
    return weight * huber / kappa;
}

double quantile_huber_grad(double u, double tau, double kappa) {
    if (!(kappa > 0.0)) throw ConfigError("quantile_huber_grad: kappa must be > 0");
    const double weight = std::abs(tau - (u < 0.0 ? 1.0 : 0.0));
    const double dh = std::abs(u) <= kappa ? u : kappa * (u > 0.0 ? 1.0 : -1.0);
    return weight * dh / kappa;
}

}  // namespace gasrl::risk
