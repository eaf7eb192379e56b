#include "gasrl/agents/iqn.hpp"

#include <cmath>

#include "gasrl/errors.hpp"
#include "gasrl/risk/risk.hpp"

namespace gasrl::agents {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Batched tower evaluation against per-state beta lists: rows of the result
// are ordered (state 0: beta 0..M-1, state 1: ...).
struct TowerEval {
    nn::Matrix values;  // (B*M x A)
    nn::Matrix embed;   // (B*M x P)
    nn::Tape tape_phi, tape_f;
};

TowerEval eval_batch(IqnTower& tower, const nn::Matrix& psi_rows,
                     const nn::Matrix& betas, bool with_tape) {
    const std::size_t B = betas.rows, M = betas.cols, P = psi_rows.cols;
    const std::size_t n = tower.embedding_dim;
    nn::Matrix cosf(B * M, n);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t m = 0; m < M; ++m)
            tower.cos_features(betas.at(b, m), cosf.row(b * M + m));

    TowerEval ev;
    ev.embed = tower.phi.forward_vec(cosf, with_tape ? &ev.tape_phi : nullptr);
    nn::Matrix h(B * M, P);
    for (std::size_t b = 0; b < B; ++b) {
        const double* s = psi_rows.row(b);
        for (std::size_t m = 0; m < M; ++m) {
            const double* e = ev.embed.row(b * M + m);
            double* hr = h.row(b * M + m);
            for (std::size_t p = 0; p < P; ++p) hr[p] = s[p] * e[p];
        }
    }
    ev.values = tower.f.forward_vec(h, with_tape ? &ev.tape_f : nullptr);
    return ev;
}

// Reverse pass for eval_batch on the online tower: adjoint on the values
// accumulates into f and phi gradients plus the psi-output adjoint.
void backward_batch(IqnTower& tower, TowerEval& ev, const nn::Matrix& psi_rows,
                    const nn::Matrix& d_values, std::vector<double>& g_phi,
                    std::vector<double>& g_f, nn::Matrix& d_psi) {
    const std::size_t B = psi_rows.rows, P = psi_rows.cols;
    const std::size_t M = ev.values.rows / B;
    nn::Matrix dh;
    tower.f.backward_vec(ev.tape_f, d_values, g_f, &dh);
    nn::Matrix de(B * M, P);
    d_psi.resize(B, P);
    for (std::size_t b = 0; b < B; ++b) {
        const double* s = psi_rows.row(b);
        double* dp = d_psi.row(b);
        for (std::size_t m = 0; m < M; ++m) {
            const double* e = ev.embed.row(b * M + m);
            const double* dhr = dh.row(b * M + m);
            double* der = de.row(b * M + m);
            for (std::size_t p = 0; p < P; ++p) {
                der[p] = dhr[p] * s[p];
                dp[p] += dhr[p] * e[p];
            }
        }
    }
    tower.phi.backward_vec(ev.tape_phi, de, g_phi);
}

}  // namespace

IqnTower::IqnTower(const AgentConfig& cfg, std::size_t obs_dim, std::uint64_t seed)
    : embedding_dim(cfg.embedding_dim) {
    nn::NetworkSpec psi_spec;
    psi_spec.input_dim = obs_dim;
    psi_spec.recurrent_layers = cfg.recurrent_units;
    psi_spec.dense_layers = cfg.dense_units;
    psi_spec.output_dim = cfg.psi_out;
    psi_spec.final_activation = nn::FinalActivation::kRelu;
    psi_spec.dropout_rate = cfg.dropout;
    psi_spec.layer_norm = cfg.layer_norm;
    psi = nn::Network(psi_spec, seed ^ Rng::fnv1a("psi"));

    nn::NetworkSpec phi_spec;
    phi_spec.input_dim = cfg.embedding_dim;
    phi_spec.output_dim = cfg.psi_out;
    phi_spec.final_activation = nn::FinalActivation::kRelu;
    phi = nn::Network(phi_spec, seed ^ Rng::fnv1a("phi"));

    nn::NetworkSpec f_spec;
    f_spec.input_dim = cfg.psi_out;
    f_spec.dense_layers = {cfg.f_hidden};
    f_spec.output_dim = env::kNumActions;
    f_spec.dropout_rate = cfg.dropout;
    f = nn::Network(f_spec, seed ^ Rng::fnv1a("f"));
}

void IqnTower::set_mode(nn::Mode m) {
    psi.set_mode(m);
    phi.set_mode(m);
    f.set_mode(m);
}

void IqnTower::cos_features(double beta, double* out) const {
    for (std::size_t k = 0; k < embedding_dim; ++k)
        out[k] = std::cos((k + 1) * kPi * beta);
}

nn::Matrix IqnTower::values_for_state(const env::EnvState& state,
                                      const std::vector<double>& betas) {
    const nn::Matrix psi_rows = psi.forward(pack_states({&state}));
    nn::Matrix bm(1, betas.size());
    for (std::size_t i = 0; i < betas.size(); ++i) bm.at(0, i) = betas[i];
    return eval_batch(*this, psi_rows, bm, false).values;
}

int iqn_act_kernel(
    const std::function<void(double, std::vector<double>&)>& eval,
    int n_actions, int K, double alpha, Rng& rng) {
    if (K < 1) throw ConfigError("iqn_act: K must be >= 1");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ConfigError("iqn_act: alpha must lie in (0,1]");
    std::vector<double> acc(n_actions, 0.0), scores(n_actions);
    for (int k = 0; k < K; ++k) {
        const double beta = alpha * rng.uniform();  // never exceeds alpha
        std::fill(scores.begin(), scores.end(), 0.0);
        eval(beta, scores);
        for (int a = 0; a < n_actions; ++a) acc[a] += scores[a];
    }
    for (auto& v : acc) v /= K;
    return argmax_lowest(acc);
}

IqnLossResult iqn_loss_with_betas(IqnTower& online, IqnTower& target,
                                  const std::vector<const replay::Transition*>& batch,
                                  const nn::Matrix& betas_online,
                                  const nn::Matrix& betas_target,
                                  const nn::Matrix& betas_policy, double kappa,
                                  double gamma) {
    if (batch.empty()) throw ConfigError("iqn_loss: empty batch");
    const std::size_t B = batch.size();
    if (betas_online.rows != B || betas_target.rows != B || betas_policy.rows != B)
        throw ConfigError("iqn_loss: beta matrices must have one row per transition");
    const std::size_t N = betas_online.cols, NP = betas_target.cols,
                      K = betas_policy.cols;

    std::vector<const env::EnvState*> cur, next;
    for (const auto* t : batch) {
        cur.push_back(&t->state);
        next.push_back(&t->next_state);
    }
    const nn::SeqBatch cur_batch = pack_states(cur);
    const nn::SeqBatch next_batch = pack_states(next);

    online.set_mode(nn::Mode::kEval);
    target.set_mode(nn::Mode::kEval);

    // Greedy next action from K policy samples on the online tower.
    const nn::Matrix psi_next_online = online.psi.forward(next_batch);
    const TowerEval pol = eval_batch(online, psi_next_online, betas_policy, false);
    std::vector<int> a_star(B);
    for (std::size_t b = 0; b < B; ++b) {
        std::vector<double> acc(env::kNumActions, 0.0);
        for (std::size_t k = 0; k < K; ++k)
            for (int a = 0; a < env::kNumActions; ++a)
                acc[a] += pol.values.at(b * K + k, a);
        a_star[b] = argmax_lowest(acc);
    }

    // Pairwise targets.
    const nn::Matrix psi_next_target = target.psi.forward(next_batch);
    const TowerEval tgt = eval_batch(target, psi_next_target, betas_target, false);
    std::vector<std::vector<double>> y(B, std::vector<double>(NP));
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t j = 0; j < NP; ++j)
            y[b][j] = batch[b]->done
                          ? batch[b]->reward
                          : batch[b]->reward +
                                gamma * tgt.values.at(b * NP + j, a_star[b]);

    // Online pass with tapes.
    online.set_mode(nn::Mode::kTrain);
    nn::Tape tape_psi;
    const nn::Matrix psi_cur = online.psi.forward(cur_batch, &tape_psi);
    TowerEval on = eval_batch(online, psi_cur, betas_online, true);

    IqnLossResult res;
    nn::Matrix d_values(B * N, env::kNumActions);
    const double norm = 1.0 / (static_cast<double>(NP) * static_cast<double>(B));
    for (std::size_t b = 0; b < B; ++b) {
        const int a_idx = env::index_from_action(batch[b]->action);
        for (std::size_t i = 0; i < N; ++i) {
            const double tau = betas_online.at(b, i);
            const double t_cur = on.values.at(b * N + i, a_idx);
            double grad = 0.0;
            for (std::size_t j = 0; j < NP; ++j) {
                const double u = y[b][j] - t_cur;
                res.loss += risk::quantile_huber(u, tau, kappa) * norm;
                grad -= risk::quantile_huber_grad(u, tau, kappa);
            }
            d_values.at(b * N + i, a_idx) = grad * norm;
        }
    }

    res.g_psi.assign(online.psi.params().size(), 0.0);
    res.g_phi.assign(online.phi.params().size(), 0.0);
    res.g_f.assign(online.f.params().size(), 0.0);
    nn::Matrix d_psi;
    backward_batch(online, on, psi_cur, d_values, res.g_phi, res.g_f, d_psi);
    online.psi.backward(tape_psi, d_psi, res.g_psi);
    return res;
}

IqnLossResult iqn_loss(IqnTower& online, IqnTower& target,
                       const std::vector<const replay::Transition*>& batch,
                       int n, int n_prime, int k_policy, double kappa,
                       double gamma, double alpha, bool risk_adjusted, Rng& rng) {
    if (n < 1 || n_prime < 1 || k_policy < 1)
        throw ConfigError("iqn_loss: sample counts must be >= 1");
    const std::size_t B = batch.size();
    const double act_alpha = (alpha < 1.0 && risk_adjusted) ? alpha : 1.0;
    nn::Matrix bp(B, k_policy), bt(B, n_prime), bo(B, n);
    for (auto& v : bp.a) v = act_alpha * rng.uniform();
    for (auto& v : bt.a) v = rng.uniform();
    for (auto& v : bo.a) v = rng.uniform();
    return iqn_loss_with_betas(online, target, batch, bo, bt, bp, kappa, gamma);
}

IqnAgent::IqnAgent(const AgentConfig& cfg, std::size_t obs_dim, std::uint64_t seed)
    : cfg_(cfg) {
    cfg_.validate();
    if (cfg.kind != AgentKind::kIqn)
        throw ConfigError("IqnAgent: config kind is not iqn");
    online_ = IqnTower(cfg, obs_dim, seed);
    target_ = online_;
    adam_psi_ = nn::OptimizerState(online_.psi.params().size(), cfg.learning_rate);
    adam_phi_ = nn::OptimizerState(online_.phi.params().size(), cfg.learning_rate);
    adam_f_ = nn::OptimizerState(online_.f.params().size(), cfg.learning_rate);
    buffer_ = std::make_unique<replay::UniformBuffer>(cfg.replay_capacity);
}

int IqnAgent::act(const env::EnvState& state, Rng& rng) {
    online_.set_mode(nn::Mode::kEval);
    const nn::Matrix psi_rows = online_.psi.forward(pack_states({&state}));
    const std::size_t P = psi_rows.cols;
    nn::Matrix cosf(1, online_.embedding_dim), h(1, P);
    auto eval = [&](double beta, std::vector<double>& scores) {
        online_.cos_features(beta, cosf.row(0));
        const nn::Matrix e = online_.phi.forward_vec(cosf);
        for (std::size_t p = 0; p < P; ++p)
            h.at(0, p) = psi_rows.at(0, p) * e.at(0, p);
        const nn::Matrix v = online_.f.forward_vec(h);
        for (int a = 0; a < env::kNumActions; ++a) scores[a] = v.at(0, a);
    };
    return env::action_from_index(
        iqn_act_kernel(eval, env::kNumActions, cfg_.iqn_k, cfg_.alpha, rng));
}

void IqnAgent::observe(replay::Transition t) { buffer_->push(std::move(t)); }

std::size_t IqnAgent::stored() const { return buffer_->size(); }

double IqnAgent::learn(Rng& rng) {
    const auto batch = buffer_->sample(cfg_.batch_size, rng);
    IqnLossResult res =
        iqn_loss(online_, target_, batch, cfg_.iqn_n, cfg_.iqn_n_prime,
                 cfg_.iqn_k, cfg_.kappa, env::discount(), cfg_.alpha,
                 cfg_.risk_adjusted_target_action, rng);
    nn::adam_step(online_.psi.params(), res.g_psi, adam_psi_);
    nn::adam_step(online_.phi.params(), res.g_phi, adam_phi_);
    nn::adam_step(online_.f.params(), res.g_f, adam_f_);
    nn::soft_update(target_.psi, online_.psi, cfg_.tau);
    nn::soft_update(target_.phi, online_.phi, cfg_.tau);
    nn::soft_update(target_.f, online_.f, cfg_.tau);
    return res.loss;
}

std::vector<std::pair<std::string, nn::Network*>> IqnAgent::named_networks() {
    return {{"psi", &online_.psi},           {"phi", &online_.phi},
            {"f", &online_.f},               {"psi_target", &target_.psi},
            {"phi_target", &target_.phi},    {"f_target", &target_.f}};
}

}  // namespace gasrl::agents
