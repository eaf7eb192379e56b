#include "gasrl/eval/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

#include "gasrl/agents/train.hpp"
#include "gasrl/errors.hpp"

namespace gasrl::eval {

std::vector<ExperimentSplit> make_splits(const market::MarketSeries& series,
                                         int n_experiments, int test_days) {
    if (n_experiments < 1) throw ConfigError("make_splits: need >= 1 experiment");
    if (test_days < env::kEpisodeLength)
        throw ConfigError("make_splits: test window shorter than one episode");
    const int len = static_cast<int>(series.size());
    const int first_test = len - n_experiments * test_days;
    // The earliest experiment still needs a usable training prefix.
    constexpr int kMinTrainDays = env::kWindow + env::kEpisodeLength + 1;
    if (first_test < kMinTrainDays)
        throw ConfigError("make_splits: series too short for " +
                          std::to_string(n_experiments) + " x " +
                          std::to_string(test_days) + "-day test windows");

    std::vector<ExperimentSplit> splits;
    for (int i = 0; i < n_experiments; ++i) {
        ExperimentSplit s;
        s.test.first = first_test + i * test_days;
        s.test.last = s.test.first + test_days - 1;
        s.train.first = 0;
        s.train.last = s.test.first - 1;
        splits.push_back(s);
    }
    return splits;
}

std::vector<int> episode_starts(const market::MarketSeries& series,
                                const market::DayRange& test) {
    if (test.first < env::kWindow - 1)
        throw ConfigError("episode_starts: test range begins before day 9");
    std::vector<int> starts;
    for (int s = test.first; s + env::kEpisodeLength - 1 <= test.last;
         s += env::kEpisodeLength) {
        // The final step's reward needs delta and sigma at day s+5.
        if (s + env::kEpisodeLength > series.last_day()) break;
        starts.push_back(s);
    }
    if (starts.empty())
        throw ConfigError("episode_starts: test range shorter than one episode");
    return starts;
}

namespace {

std::vector<env::TrajectoryStep> rollout(agents::TradingPolicy& policy,
                                         const market::MarketSeries& series,
                                         const market::PcaModel& pca,
                                         const market::DayRange& test, Rng& rng) {
    env::TradingEnv environment(series, pca);
    std::vector<env::TrajectoryStep> traj;
    for (const int start : episode_starts(series, test)) {
        environment.reset(env::EpisodeSpec{start});
        while (!environment.finished()) {
            const int action = policy.act(environment.state(), rng);
            traj.push_back(environment.step(action).log);
        }
    }
    return traj;
}

}  // namespace

SigmaCalibration calibrate_sigma_hat(const market::MarketSeries& series,
                                     const market::PcaModel& pca,
                                     const ExperimentSplit& split) {
    auto riskiest = agents::make_constant_policy(env::kMaxTrade);
    Rng rng(0);
    SigmaCalibration out;
    out.riskiest_trajectory = rollout(*riskiest, series, pca, split.test, rng);
    const auto& traj = out.riskiest_trajectory;
    const auto n = static_cast<double>(traj.size());

    std::vector<double> sigmas;
    sigmas.reserve(traj.size());
    for (const auto& s : traj) sigmas.push_back(s.sigma_state);
    std::sort(sigmas.begin(), sigmas.end());
    sigmas.erase(std::unique(sigmas.begin(), sigmas.end()), sigmas.end());

    const auto fraction_for = [&](double threshold) {
        std::size_t count = 0;
        for (const auto& s : traj)
            if (std::abs(s.position_before) >= 7 && s.sigma_state > threshold)
                ++count;
        return static_cast<double>(count) / n;
    };

    constexpr double kTarget = 0.40 - 0.02;
    // Largest observed threshold first; "just below the minimum" admits every
    // observed sigma.
    for (auto it = sigmas.rbegin(); it != sigmas.rend(); ++it) {
        const double frac = fraction_for(*it);
        if (frac >= kTarget) {
            out.sigma_hat = *it;
            out.achieved_fraction = frac;
            out.riskiest_risky_count =
                static_cast<std::size_t>(std::lround(frac * n));
            return out;
        }
    }
    const double below_min =
        std::nexttoward(sigmas.front(), -std::numeric_limits<double>::infinity());
    const double frac = fraction_for(below_min);
    if (frac >= kTarget) {
        out.sigma_hat = below_min;
        out.achieved_fraction = frac;
        out.riskiest_risky_count = static_cast<std::size_t>(std::lround(frac * n));
        return out;
    }
    // Fewer than 38% of the riskiest policy's states ever reach |c| >= 7:
    // report the achievable maximum and fall back to the smallest sigma.
    out.reachable = false;
    out.sigma_hat = sigmas.front();
    out.achieved_fraction = fraction_for(out.sigma_hat);
    out.riskiest_risky_count =
        static_cast<std::size_t>(std::lround(out.achieved_fraction * n));
    return out;
}

RiskyStats risky_state_pct(const std::vector<env::TrajectoryStep>& trajectory,
                           double sigma_hat, std::size_t riskiest_risky_count) {
    if (trajectory.empty())
        throw ConfigError("risky_state_pct: empty trajectory");
    RiskyStats out;
    for (const auto& s : trajectory)
        if (std::abs(s.position_before) >= 7 && s.sigma_state > sigma_hat)
            ++out.risky_count;
    out.fraction =
        static_cast<double>(out.risky_count) / static_cast<double>(trajectory.size());
    if (riskiest_risky_count > 0)
        out.ratio = static_cast<double>(out.risky_count) /
                    static_cast<double>(riskiest_risky_count);
    else
        out.ratio = out.risky_count == 0
                        ? 1.0
                        : std::numeric_limits<double>::infinity();
    return out;
}

EvalReport run_test(agents::TradingPolicy& policy,
                    const market::MarketSeries& series,
                    const market::PcaModel& pca, const ExperimentSplit& split,
                    Rng& rng, const std::string& config_echo,
                    std::uint64_t seed) {
    const SigmaCalibration calib = calibrate_sigma_hat(series, pca, split);

    EvalReport report;
    report.trajectory = rollout(policy, series, pca, split.test, rng);
    for (const auto& s : report.trajectory)
        report.pnl += s.position_before * s.delta_next;

    const RiskyStats stats = risky_state_pct(report.trajectory, calib.sigma_hat,
                                             calib.riskiest_risky_count);
    report.risky_pct = stats.fraction;
    report.risky_ratio = stats.ratio;
    report.sigma_hat = calib.sigma_hat;
    report.sigma_hat_reachable = calib.reachable;
    report.n_states = report.trajectory.size();
    report.config_echo = config_echo;
    report.seed = seed;
    return report;
}

AblationTable run_ablation(agents::AgentKind kind,
                           const std::vector<double>& alphas,
                           const std::vector<ExperimentSplit>& splits,
                           const std::vector<std::uint64_t>& seeds,
                           const agents::AgentConfig& base_cfg,
                           const market::MarketSeries& series, int pca_dim,
                           int jobs) {
    if (alphas.empty() || splits.empty() || seeds.empty())
        throw ConfigError("run_ablation: alphas, splits and seeds must be non-empty");
    if (jobs < 1) throw ConfigError("run_ablation: jobs must be >= 1");

    // Shared read-only PCA models, fitted on each training range only.
    std::vector<market::PcaModel> pca_models;
    pca_models.reserve(splits.size());
    for (const auto& split : splits)
        pca_models.push_back(
            market::pca_fit(series, split.train.first, split.train.last, pca_dim));

    struct Run {
        double alpha;
        int split_index;
        std::uint64_t seed;
    };
    std::vector<Run> runs;
    for (const double alpha : alphas)
        for (std::size_t si = 0; si < splits.size(); ++si)
            for (const auto seed : seeds)
                runs.push_back(Run{alpha, static_cast<int>(si), seed});

    AblationTable table;
    table.alphas = alphas;
    table.rows.resize(runs.size());

    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    const auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= runs.size() || failed.load()) break;
            try {
                const Run& run = runs[i];
                agents::AgentConfig cfg = base_cfg;
                cfg.kind = kind;
                cfg.alpha = run.alpha;
                const auto& split = splits[static_cast<std::size_t>(run.split_index)];
                const auto& pca = pca_models[static_cast<std::size_t>(run.split_index)];
                const agents::TrainResult trained =
                    agents::train(cfg, series, &pca, split.train, run.seed);
                auto policy = trained.make_policy(series);
                Rng eval_rng(run.seed, "eval");
                const EvalReport report = run_test(*policy, series, pca, split,
                                                   eval_rng, cfg.echo(), run.seed);
                table.rows[i] = AblationRow{run.alpha,        run.split_index,
                                            run.seed,         report.pnl,
                                            report.risky_pct, report.risky_ratio};
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failed.store(true);
                if (failure.empty()) failure = e.what();
            }
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw NumericFault("ablation run failed: " + failure);

    table.mean_pnl.assign(alphas.size(), 0.0);
    table.mean_risky_pct.assign(alphas.size(), 0.0);
    table.mean_risky_ratio.assign(alphas.size(), 0.0);
    const double per_alpha =
        static_cast<double>(splits.size()) * static_cast<double>(seeds.size());
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        for (const auto& row : table.rows) {
            if (row.alpha == alphas[ai]) {
                table.mean_pnl[ai] += row.pnl / per_alpha;
                table.mean_risky_pct[ai] += row.risky_pct / per_alpha;
                table.mean_risky_ratio[ai] += row.risky_ratio / per_alpha;
            }
        }
    }
    return table;
}

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void write_ablation_csv(const AblationTable& table, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open " + path + " for writing");
    os << "alpha,split,seed,pnl,risky_pct,risky_ratio\n";
    for (const auto& r : table.rows)
        os << fmt17(r.alpha) << ',' << r.split_index << ',' << r.seed << ','
           << fmt17(r.pnl) << ',' << fmt17(r.risky_pct) << ','
           << fmt17(r.risky_ratio) << "\n";
    if (!os) throw DataError("write failed for " + path);
}

void write_ablation_summary_csv(const AblationTable& table,
                                const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot open " + path + " for writing");
    os << "alpha,mean_pnl,mean_risky_pct,mean_risky_ratio\n";
    for (std::size_t i = 0; i < table.alphas.size(); ++i)
        os << fmt17(table.alphas[i]) << ',' << fmt17(table.mean_pnl[i]) << ','
           << fmt17(table.mean_risky_pct[i]) << ','
           << fmt17(table.mean_risky_ratio[i]) << "\n";
    if (!os) throw DataError("write failed for " + path);
}

}  // namespace gasrl::eval
