#include "gasrl/agents/c51.hpp"

#include <cmath>

#include "gasrl/errors.hpp"

namespace gasrl::agents {

namespace {

// Expected value of the action's predicted distribution, computed directly so
// the alpha = 1 policy is bit-identical to the risk-neutral one.
double dist_mean(const nn::Matrix& probs, std::size_t row, int a_idx,
                 const risk::AtomGrid& grid) {
    const double* p = probs.row(row) + static_cast<std::size_t>(a_idx) * grid.n_atoms;
    double m = 0.0;
    for (int j = 0; j < grid.n_atoms; ++j) m += grid.atom(j) * p[j];
    return m;
}

std::vector<double> action_scores(const nn::Matrix& probs, std::size_t row,
                                  const risk::AtomGrid& grid, double alpha) {
    std::vector<double> scores(env::kNumActions);
    for (int a = 0; a < env::kNumActions; ++a) {
        if (alpha >= 1.0) {
            scores[a] = dist_mean(probs, row, a, grid);
        } else {
            scores[a] =
                risk::cvar_categorical(c51_distribution(probs, row, a, grid), alpha);
        }
    }
    return scores;
}

}  // namespace

risk::CategoricalValueDistribution c51_distribution(const nn::Matrix& probs,
                                                    std::size_t row, int action_idx,
                                                    const risk::AtomGrid& grid) {
    const double* p =
        probs.row(row) + static_cast<std::size_t>(action_idx) * grid.n_atoms;
    risk::CategoricalValueDistribution d;
    d.grid = grid;
    d.probs.assign(p, p + grid.n_atoms);
    return d;
}

int c51_act(nn::Network& net, const env::EnvState& state,
            const risk::AtomGrid& grid, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ConfigError("c51_act: alpha must lie in (0,1]");
    const nn::Mode prev = net.mode();
    net.set_mode(nn::Mode::kEval);
    const nn::Matrix probs = net.forward(pack_states({&state}));
    net.set_mode(prev);
    return env::action_from_index(
        argmax_lowest(action_scores(probs, 0, grid, alpha)));
}

DistLoss c51_loss(nn::Network& online, nn::Network& target,
                  const std::vector<const replay::Transition*>& batch,
                  const risk::AtomGrid& grid, double gamma, double alpha,
                  bool risk_adjusted) {
    if (batch.empty()) throw ConfigError("c51_loss: empty batch");
    grid.validate();
    const std::size_t B = batch.size();
    const double act_alpha = (alpha < 1.0 && risk_adjusted) ? alpha : 1.0;

    std::vector<const env::EnvState*> cur, next;
    for (const auto* t : batch) {
        cur.push_back(&t->state);
        next.push_back(&t->next_state);
    }
    const nn::SeqBatch cur_batch = pack_states(cur);
    const nn::SeqBatch next_batch = pack_states(next);

    online.set_mode(nn::Mode::kEval);
    target.set_mode(nn::Mode::kEval);
    const nn::Matrix p_next_online = online.forward(next_batch);
    const nn::Matrix p_next_target = target.forward(next_batch);

    // Projected targets.
    std::vector<std::vector<double>> m(B);
    for (std::size_t b = 0; b < B; ++b) {
        const int a_star =
            argmax_lowest(action_scores(p_next_online, b, grid, act_alpha));
        const auto src = c51_distribution(p_next_target, b, a_star, grid);
        m[b] = risk::project_categorical(batch[b]->reward,
                                         batch[b]->done ? 0.0 : gamma, src);
    }

    online.set_mode(nn::Mode::kTrain);
    nn::Tape tape;
    const nn::Matrix p = online.forward(cur_batch, &tape);

    DistLoss out;
    nn::Matrix adjoint(B, p.cols);
    for (std::size_t b = 0; b < B; ++b) {
        const auto a_idx =
            static_cast<std::size_t>(env::index_from_action(batch[b]->action));
        const double* pb = p.row(b) + a_idx * grid.n_atoms;
        double ce = 0.0;
        double* adj = adjoint.row(b) + a_idx * grid.n_atoms;
        for (int j = 0; j < grid.n_atoms; ++j) {
            const double pj = pb[j];
            ce -= m[b][j] * std::log(std::max(pj, 1e-12));
            if (pj >= 1e-12)
                adj[j] = -m[b][j] / pj / static_cast<double>(B);
        }
        out.loss += ce / static_cast<double>(B);
    }

    out.grads.assign(online.params().size(), 0.0);
    online.backward(tape, adjoint, out.grads);
    return out;
}

C51Agent::C51Agent(const AgentConfig& cfg, std::size_t obs_dim, std::uint64_t seed)
    : cfg_(cfg) {
    cfg_.validate();
    if (cfg.kind != AgentKind::kC51)
        throw ConfigError("C51Agent: config kind is not c51");
    grid_ = risk::AtomGrid{cfg.v_min, cfg.v_max, cfg.n_atoms};
    grid_.validate();

    nn::NetworkSpec spec;
    spec.input_dim = obs_dim;
    spec.recurrent_layers = cfg.recurrent_units;
    spec.dense_layers = cfg.dense_units;
    spec.output_dim = static_cast<std::size_t>(env::kNumActions) * cfg.n_atoms;
    spec.final_activation = nn::FinalActivation::kSoftmaxPerGroup;
    spec.group_size = static_cast<std::size_t>(cfg.n_atoms);
    spec.dropout_rate = cfg.dropout;
    spec.layer_norm = cfg.layer_norm;
    online_ = nn::Network(spec, seed ^ Rng::fnv1a("c51"));
    target_ = online_;
    adam_ = nn::OptimizerState(online_.params().size(), cfg.learning_rate);
    buffer_ = std::make_unique<replay::UniformBuffer>(cfg.replay_capacity);
}

int C51Agent::act(const env::EnvState& state, Rng&) {
    return c51_act(online_, state, grid_, cfg_.alpha);
}

void C51Agent::observe(replay::Transition t) { buffer_->push(std::move(t)); }

std::size_t C51Agent::stored() const { return buffer_->size(); }

double C51Agent::learn(Rng& rng) {
    const auto batch = buffer_->sample(cfg_.batch_size, rng);
    const DistLoss res =
        c51_loss(online_, target_, batch, grid_, env::discount(), cfg_.alpha,
                 cfg_.risk_adjusted_target_action);
    nn::adam_step(online_.params(), res.grads, adam_);
    nn::soft_update(target_, online_, cfg_.tau);
    return res.loss;
}

std::vector<std::pair<std::string, nn::Network*>> C51Agent::named_networks() {
    return {{"online", &online_}, {"target", &target_}};
}

}  // namespace gasrl::agents
