#include "gasrl/agents/train.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "gasrl/agents/c51.hpp"
#include "gasrl/agents/dqn.hpp"
#include "gasrl/agents/iqn.hpp"
#include "gasrl/agents/qrdqn.hpp"
#include "gasrl/errors.hpp"
#include "gasrl/nn/checkpoint.hpp"

namespace gasrl::agents {

namespace {

class SharedLearnerPolicy : public TradingPolicy {
public:
    explicit SharedLearnerPolicy(std::shared_ptr<Learner> learner)
        : learner_(std::move(learner)) {}
    int act(const env::EnvState& state, Rng& rng) override {
        return learner_->act(state, rng);
    }

private:
    std::shared_ptr<Learner> learner_;
};

class ExtraTreesPolicy : public TradingPolicy {
public:
    ExtraTreesPolicy(const market::MarketSeries& series,
                     std::shared_ptr<ExtraTreesModel> model, bool symmetric)
        : series_(series), model_(std::move(model)), symmetric_(symmetric) {}
    int act(const env::EnvState& state, Rng&) override {
        const int y = extra_trees_predict(
            *model_, series_.days[static_cast<std::size_t>(state.day)].features);
        return extra_trees_action(y, symmetric_);
    }

private:
    const market::MarketSeries& series_;
    std::shared_ptr<ExtraTreesModel> model_;
    bool symmetric_;
};

class ConstantPolicy : public TradingPolicy {
public:
    explicit ConstantPolicy(int action) : action_(action) {}
    int act(const env::EnvState&, Rng&) override { return action_; }

private:
    int action_;
};

}  // namespace

std::unique_ptr<Learner> make_learner(const AgentConfig& cfg, std::size_t obs_dim,
                                      std::uint64_t seed) {
    switch (cfg.kind) {
        case AgentKind::kDqn:
        case AgentKind::kPrioritizedDqn:
        case AgentKind::kDuelingDqn:
        case AgentKind::kPrioritizedDuelingDqn:
            return std::make_unique<DqnAgent>(cfg, obs_dim, seed);
        case AgentKind::kC51:
            return std::make_unique<C51Agent>(cfg, obs_dim, seed);
        case AgentKind::kQrDqn:
            return std::make_unique<QrDqnAgent>(cfg, obs_dim, seed);
        case AgentKind::kIqn:
            return std::make_unique<IqnAgent>(cfg, obs_dim, seed);
        case AgentKind::kExtraTrees:
            throw ConfigError("make_learner: extra_trees is fit, not trained");
    }
    throw ConfigError("make_learner: unknown agent kind");
}

double epsilon_at(const AgentConfig& cfg, std::size_t step) {
    const double decay_steps =
        cfg.epsilon_fraction * static_cast<double>(cfg.train_steps);
    if (decay_steps <= 0.0) return cfg.epsilon_end;
    const double frac =
        std::min(1.0, static_cast<double>(step) / decay_steps);
    return cfg.epsilon_start - (cfg.epsilon_start - cfg.epsilon_end) * frac;
}

std::unique_ptr<TradingPolicy> TrainResult::make_policy(
    const market::MarketSeries& series) const {
    if (trees)
        return std::make_unique<ExtraTreesPolicy>(series, trees,
                                                  config.symmetric_tree_actions);
    return std::make_unique<SharedLearnerPolicy>(learner);
}

std::unique_ptr<TradingPolicy> LoadedAgent::make_policy(
    const market::MarketSeries& series) const {
    if (trees)
        return std::make_unique<ExtraTreesPolicy>(series, trees,
                                                  config.symmetric_tree_actions);
    return std::make_unique<SharedLearnerPolicy>(learner);
}

std::unique_ptr<TradingPolicy> make_constant_policy(int action) {
    if (action < -env::kMaxTrade || action > env::kMaxTrade)
        throw ConfigError("constant policy: action outside [-3,3]");
    return std::make_unique<ConstantPolicy>(action);
}

TrainResult train(const AgentConfig& cfg, const market::MarketSeries& series,
                  const market::PcaModel* pca, const market::DayRange& train_range,
                  std::uint64_t master_seed) {
    cfg.validate();
    if (train_range.first < 0 || train_range.last > series.last_day() ||
        train_range.first > train_range.last)
        throw ConfigError("train: training range outside series");

    TrainResult result;
    result.config = cfg;

    if (cfg.kind == AgentKind::kExtraTrees) {
        // Supervised direction fit: features o_t, label 1{delta_{t+1} > 0}.
        std::vector<std::vector<double>> rows;
        std::vector<int> labels;
        for (int t = train_range.first; t < train_range.last; ++t) {
            rows.push_back(series.days[t].features);
            labels.push_back(series.days[t + 1].delta > 0.0 ? 1 : 0);
        }
        result.trees = std::make_shared<ExtraTreesModel>(extra_trees_fit(
            rows, labels, ExtraTreesParams{cfg.n_trees, cfg.min_samples_split},
            master_seed));
        return result;
    }

    if (pca == nullptr) throw ConfigError("train: RL kinds require a PCA model");
    const int lo = std::max(env::kWindow - 1, train_range.first);
    const int hi = train_range.last - env::kEpisodeLength;
    if (lo > hi) throw ConfigError("train: training range too short for episodes");

    result.learner =
        std::shared_ptr<Learner>(make_learner(cfg, pca->d + 2, master_seed));
    Learner& agent = *result.learner;

    Rng explore_rng(master_seed, "explore");
    Rng replay_rng(master_seed, "replay");
    Rng episode_rng(master_seed, "episodes");
    Rng act_rng(master_seed, "iqn");  // consumed by sampling policies only

    env::TradingEnv environment(series, *pca);
    double episode_return = 0.0;
    int episode_start = 0;

    result.steps.reserve(cfg.train_steps);
    for (std::size_t step = 0; step < cfg.train_steps; ++step) {
        if (environment.finished()) {
            episode_start =
                lo + static_cast<int>(episode_rng.uniform_int(
                         static_cast<std::uint64_t>(hi - lo + 1)));
            environment.reset(env::EpisodeSpec{episode_start});
            episode_return = 0.0;
        }
        const env::EnvState state = environment.state();
        const double eps = epsilon_at(cfg, step);
        const int base = agent.act(state, act_rng);
        const int action = epsilon_greedy(base, eps, explore_rng);
        const env::StepResult sr = environment.step(action);
        agent.observe(
            replay::Transition{state, action, sr.reward, sr.next_state, sr.done});
        episode_return += sr.reward;
        if (sr.done)
            result.episodes.push_back(EpisodeLogEntry{episode_start, episode_return});

        TrainLogStep log;
        log.step = step;
        log.epsilon = eps;
        if (agent.stored() >= cfg.min_fill) {
            log.loss = agent.learn(replay_rng);
            log.learned = true;
        }
        result.steps.push_back(log);
    }
    return result;
}

void save_checkpoint(const TrainResult& result, const market::PcaModel* pca,
                     const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir + "/agent.cfg");
        if (!os) throw DataError("cannot write " + dir + "/agent.cfg");
        os << result.config.echo();
    }
    if (result.trees) {
        save_extra_trees(*result.trees, dir + "/trees.bin");
        return;
    }
    if (!result.learner)
        throw ConfigError("save_checkpoint: nothing trained");
    if (pca == nullptr)
        throw ConfigError("save_checkpoint: RL checkpoints need the PCA model");
    market::save_pca(*pca, dir + "/pca.bin");
    for (auto& [name, net] : result.learner->named_networks())
        nn::save_network(*net, dir + "/" + name + ".net");
}

LoadedAgent load_checkpoint(const std::string& dir) {
    std::ifstream cfg_file(dir + "/agent.cfg");
    if (!cfg_file) throw DataError("cannot open " + dir + "/agent.cfg");
    std::string text((std::istreambuf_iterator<char>(cfg_file)),
                     std::istreambuf_iterator<char>());
    LoadedAgent out;
    out.config = AgentConfig::parse_echo(text);

    if (out.config.kind == AgentKind::kExtraTrees) {
        out.trees = std::make_shared<ExtraTreesModel>(
            load_extra_trees(dir + "/trees.bin"));
        return out;
    }

    out.pca = market::load_pca(dir + "/pca.bin");
    out.learner = std::shared_ptr<Learner>(
        make_learner(out.config, out.pca.d + 2, 0));
    for (auto& [name, net] : out.learner->named_networks()) {
        const nn::Network loaded = nn::load_network(dir + "/" + name + ".net");
        if (!(loaded.spec() == net->spec()))
            throw DataError("checkpoint " + dir + "/" + name +
                            ".net does not match the configured architecture");
        net->params() = loaded.params();
    }
    return out;
}

}  // namespace gasrl::agents
