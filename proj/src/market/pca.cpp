#include "gasrl/market/pca.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "gasrl/errors.hpp"
#include "gasrl/rng.hpp"

namespace gasrl::market {

namespace {

constexpr double kTolerance = 1e-10;
constexpr int kMaxIterations = 10000;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void normalize(std::vector<double>& v) {
    const double n = std::sqrt(dot(v, v));
    if (n > 0.0)
        for (auto& x : v) x /= n;
}

}  // namespace

void PcaModel::validate() const {
    if (d < 1 || mean.empty() || components.size() != mean.size() * d)
        throw ConfigError("pca model: inconsistent dimensions");
}

PcaModel pca_fit(const MarketSeries& series, int first_day, int last_day, int d) {
    const int n = last_day - first_day + 1;
    if (first_day < 0 || last_day >= static_cast<int>(series.size()))
        throw ConfigError("pca_fit: day range outside series");
    if (n < 2) throw ConfigError("pca_fit: need at least 2 rows");
    if (d < 1) throw ConfigError("pca_fit: d must be >= 1");
    const auto f = series.feature_dim;
    if (d > static_cast<int>(f)) throw ConfigError("pca_fit: d exceeds feature dim");
    if (n <= d) throw ConfigError("pca_fit: range length must exceed d");

    PcaModel model;
    model.d = d;
    model.mean.assign(f, 0.0);
    for (int t = first_day; t <= last_day; ++t)
        for (std::size_t j = 0; j < f; ++j)
            model.mean[j] += series.days[t].features[j];
    for (auto& m : model.mean) m /= n;

    // Sample covariance, O(n F^2).
    std::vector<double> cov(f * f, 0.0);
    std::vector<double> centered(f);
    for (int t = first_day; t <= last_day; ++t) {
        for (std::size_t j = 0; j < f; ++j)
            centered[j] = series.days[t].features[j] - model.mean[j];
        for (std::size_t i = 0; i < f; ++i) {
            const double ci = centered[i];
            if (ci == 0.0) continue;
            double* row = cov.data() + i * f;
            for (std::size_t j = 0; j < f; ++j) row[j] += ci * centered[j];
        }
    }
    for (auto& c : cov) c /= (n - 1);

    // Power iteration with deflation: each component is re-orthogonalized
    // against the ones already found, which keeps the basis orthonormal even
    // for (near-)degenerate eigenvalues.
    Rng rng(0x70CAULL, "pca");
    std::vector<std::vector<double>> comps;
    model.eigenvalues.clear();
    std::vector<double> v(f), next(f);
    for (int k = 0; k < d; ++k) {
        for (auto& x : v) x = rng.normal();
        for (const auto& u : comps) {
            const double p = dot(v, u);
            for (std::size_t j = 0; j < f; ++j) v[j] -= p * u[j];
        }
        normalize(v);
        for (int it = 0; it < kMaxIterations; ++it) {
            for (std::size_t i = 0; i < f; ++i) {
                const double* row = cov.data() + i * f;
                double s = 0.0;
                for (std::size_t j = 0; j < f; ++j) s += row[j] * v[j];
                next[i] = s;
            }
            for (const auto& u : comps) {
                const double p = dot(next, u);
                for (std::size_t j = 0; j < f; ++j) next[j] -= p * u[j];
            }
            const double norm = std::sqrt(dot(next, next));
            if (norm < 1e-300) break;  // zero variance left in this subspace
            for (auto& x : next) x /= norm;
            double diff = 0.0;
            for (std::size_t j = 0; j < f; ++j) {
                const double dplus = next[j] - v[j];
                diff += dplus * dplus;
            }
            // A sign flip between iterations is also converged.
            double diff_neg = 0.0;
            for (std::size_t j = 0; j < f; ++j) {
                const double dminus = next[j] + v[j];
                diff_neg += dminus * dminus;
            }
            v = next;
            if (std::min(diff, diff_neg) < kTolerance * kTolerance) break;
        }
        // Sign convention: largest-magnitude coordinate positive.
        std::size_t arg = 0;
        for (std::size_t j = 1; j < f; ++j)
            if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
        if (v[arg] < 0.0)
            for (auto& x : v) x = -x;

        // Rayleigh quotient on the original covariance.
        double lambda = 0.0;
        for (std::size_t i = 0; i < f; ++i) {
            const double* row = cov.data() + i * f;
            double s = 0.0;
            for (std::size_t j = 0; j < f; ++j) s += row[j] * v[j];
            lambda += v[i] * s;
        }
        model.eigenvalues.push_back(lambda);
        comps.push_back(v);
    }

    model.components.assign(f * d, 0.0);
    for (int k = 0; k < d; ++k)
        for (std::size_t j = 0; j < f; ++j)
            model.components[j * d + k] = comps[k][j];
    return model;
}

std::vector<double> pca_transform(const PcaModel& model,
                                  const std::vector<double>& o) {
    model.validate();
    if (o.size() != model.feature_dim())
        throw ConfigError("pca_transform: feature dim " + std::to_string(o.size()) +
                          " != model dim " + std::to_string(model.feature_dim()));
    std::vector<double> x(model.d, 0.0);
    for (std::size_t j = 0; j < o.size(); ++j) {
        const double c = o[j] - model.mean[j];
        if (c == 0.0) continue;
        const double* row = model.components.data() + j * model.d;
        for (int k = 0; k < model.d; ++k) x[k] += c * row[k];
    }
    return x;
}

std::vector<double> pca_inverse(const PcaModel& model,
                                const std::vector<double>& x) {
    model.validate();
    if (x.size() != static_cast<std::size_t>(model.d))
        throw ConfigError("pca_inverse: reduced dim mismatch");
    std::vector<double> o(model.mean);
    for (std::size_t j = 0; j < o.size(); ++j) {
        const double* row = model.components.data() + j * model.d;
        double s = 0.0;
        for (int k = 0; k < model.d; ++k) s += row[k] * x[k];
        o[j] += s;
    }
    return o;
}

void save_pca(const PcaModel& model, const std::string& path) {
    model.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open " + path + " for writing");
    const char magic[8] = {'G', 'A', 'S', 'R', 'L', 'P', 'C', 'A'};
    os.write(magic, 8);
    const std::uint64_t f = model.mean.size();
    const std::uint64_t d = static_cast<std::uint64_t>(model.d);
    os.write(reinterpret_cast<const char*>(&f), sizeof(f));
    os.write(reinterpret_cast<const char*>(&d), sizeof(d));
    auto put = [&](const std::vector<double>& v) {
        os.write(reinterpret_cast<const char*>(v.data()),
                 static_cast<std::streamsize>(v.size() * sizeof(double)));
    };
    put(model.mean);
    put(model.components);
    put(model.eigenvalues);
    if (!os) throw DataError("write failed for " + path);
}

PcaModel load_pca(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::string(magic, 8) != "GASRLPCA")
        throw DataError(path + ": bad PCA checkpoint magic");
    std::uint64_t f = 0, d = 0;
    is.read(reinterpret_cast<char*>(&f), sizeof(f));
    is.read(reinterpret_cast<char*>(&d), sizeof(d));
    if (!is || f == 0 || d == 0 || d > f)
        throw DataError(path + ": bad PCA dimensions");
    PcaModel model;
    model.d = static_cast<int>(d);
    model.mean.resize(f);
    model.components.resize(f * d);
    model.eigenvalues.resize(d);
    auto get = [&](std::vector<double>& v) {
        is.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
    };
    get(model.mean);
    get(model.components);
    get(model.eigenvalues);
    if (!is) throw DataError(path + ": truncated PCA checkpoint");
    return model;
}

}  // namespace gasrl::market
