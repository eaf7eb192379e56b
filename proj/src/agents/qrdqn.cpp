#include "gasrl/agents/qrdqn.hpp"

#include <algorithm>
#include <cmath>

#include "gasrl/errors.hpp"

namespace gasrl::agents {

namespace {

std::vector<double> action_scores(const nn::Matrix& out, std::size_t row, int L,
                                  double alpha) {
    std::vector<double> scores(env::kNumActions);
    for (int a = 0; a < env::kNumActions; ++a) {
        const double* q = out.row(row) + static_cast<std::size_t>(a) * L;
        if (alpha >= 1.0) {
            double m = 0.0;
            for (int i = 0; i < L; ++i) m += q[i];
            scores[a] = m / L;
        } else {
            risk::QuantileSet qs;
            qs.values.assign(q, q + L);
            std::sort(qs.values.begin(), qs.values.end());
            scores[a] = risk::cvar_quantiles(qs, alpha);
        }
    }
    return scores;
}

}  // namespace

int qrdqn_act(nn::Network& net, const env::EnvState& state, int n_quantiles,
              double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ConfigError("qrdqn_act: alpha must lie in (0,1]");
    if (alpha < 1.0 && alpha * n_quantiles < 1.0)
        throw ConfigError("qrdqn_act: confidence level unresolvable at this L");
    const nn::Mode prev = net.mode();
    net.set_mode(nn::Mode::kEval);
    const nn::Matrix out = net.forward(pack_states({&state}));
    net.set_mode(prev);
    return env::action_from_index(
        argmax_lowest(action_scores(out, 0, n_quantiles, alpha)));
}

DistLossQr qrdqn_loss(nn::Network& online, nn::Network& target,
                      const std::vector<const replay::Transition*>& batch,
                      int n_quantiles, double kappa, double gamma, double alpha,
                      bool risk_adjusted) {
    if (batch.empty()) throw ConfigError("qrdqn_loss: empty batch");
    const std::size_t B = batch.size();
    const int L = n_quantiles;
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
    const nn::Matrix out_next_online = online.forward(next_batch);
    const nn::Matrix out_next_target = target.forward(next_batch);

    // Pairwise targets y_j per transition.
    std::vector<std::vector<double>> y(B, std::vector<double>(L));
    for (std::size_t b = 0; b < B; ++b) {
        if (batch[b]->done) {
            std::fill(y[b].begin(), y[b].end(), batch[b]->reward);
            continue;
        }
        const int a_star =
            argmax_lowest(action_scores(out_next_online, b, L, act_alpha));
        const double* tq =
            out_next_target.row(b) + static_cast<std::size_t>(a_star) * L;
        for (int j = 0; j < L; ++j) y[b][j] = batch[b]->reward + gamma * tq[j];
    }

    online.set_mode(nn::Mode::kTrain);
    nn::Tape tape;
    const nn::Matrix out = online.forward(cur_batch, &tape);

    DistLossQr res;
    nn::Matrix adjoint(B, out.cols);
    const double inv_b = 1.0 / static_cast<double>(B);
    const double inv_l = 1.0 / static_cast<double>(L);
    for (std::size_t b = 0; b < B; ++b) {
        const auto a_idx =
            static_cast<std::size_t>(env::index_from_action(batch[b]->action));
        const double* t_cur = out.row(b) + a_idx * static_cast<std::size_t>(L);
        double* adj = adjoint.row(b) + a_idx * static_cast<std::size_t>(L);
        for (int i = 0; i < L; ++i) {
            const double tau_hat = (2.0 * i + 1.0) / (2.0 * L);
            double grad_i = 0.0;
            for (int j = 0; j < L; ++j) {
                const double u = y[b][j] - t_cur[i];
                res.loss += risk::quantile_huber(u, tau_hat, kappa) * inv_l * inv_b;
                grad_i -= risk::quantile_huber_grad(u, tau_hat, kappa);
            }
            adj[i] = grad_i * inv_l * inv_b;
        }
    }

    res.grads.assign(online.params().size(), 0.0);
    online.backward(tape, adjoint, res.grads);
    return res;
}

QrDqnAgent::QrDqnAgent(const AgentConfig& cfg, std::size_t obs_dim,
                       std::uint64_t seed)
    : cfg_(cfg) {
    cfg_.validate();
    if (cfg.kind != AgentKind::kQrDqn)
        throw ConfigError("QrDqnAgent: config kind is not qr_dqn");

    nn::NetworkSpec spec;
    spec.input_dim = obs_dim;
    spec.recurrent_layers = cfg.recurrent_units;
    spec.dense_layers = cfg.dense_units;
    spec.output_dim =
        static_cast<std::size_t>(env::kNumActions) * cfg.n_quantiles;
    spec.dropout_rate = cfg.dropout;
    spec.layer_norm = cfg.layer_norm;
    online_ = nn::Network(spec, seed ^ Rng::fnv1a("qrdqn"));
    target_ = online_;
    adam_ = nn::OptimizerState(online_.params().size(), cfg.learning_rate);
    buffer_ = std::make_unique<replay::UniformBuffer>(cfg.replay_capacity);
}

int QrDqnAgent::act(const env::EnvState& state, Rng&) {
    return qrdqn_act(online_, state, cfg_.n_quantiles, cfg_.alpha);
}

void QrDqnAgent::observe(replay::Transition t) { buffer_->push(std::move(t)); }

std::size_t QrDqnAgent::stored() const { return buffer_->size(); }

double QrDqnAgent::learn(Rng& rng) {
    const auto batch = buffer_->sample(cfg_.batch_size, rng);
    const DistLossQr res =
        qrdqn_loss(online_, target_, batch, cfg_.n_quantiles, cfg_.kappa,
                   env::discount(), cfg_.alpha, cfg_.risk_adjusted_target_action);
    nn::adam_step(online_.params(), res.grads, adam_);
    nn::soft_update(target_, online_, cfg_.tau);
    return res.loss;
}

std::vector<std::pair<std::string, nn::Network*>> QrDqnAgent::named_networks() {
    return {{"online", &online_}, {"target", &target_}};
}

}  // namespace gasrl::agents
