#include "gasrl/agents/dqn.hpp"

#include <cmath>

#include "gasrl/errors.hpp"

namespace gasrl::agents {

std::vector<double> dueling_q(double v, const std::vector<double>& advantages) {
    if (advantages.empty()) throw ConfigError("dueling_q: empty advantage vector");
    double mean = 0.0;
    for (const double a : advantages) mean += a;
    mean /= static_cast<double>(advantages.size());
    std::vector<double> q(advantages.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = v + (advantages[i] - mean);
    return q;
}

namespace {

std::vector<double> mean_q_row(const CriticPair& pair, const env::EnvState& state) {
    const nn::SeqBatch batch = pack_states({&state});
    const nn::Matrix q1 = pair.online1->forward(batch);
    const nn::Matrix q2 = pair.online2->forward(batch);
    std::vector<double> mean(q1.cols);
    for (std::size_t i = 0; i < q1.cols; ++i)
        mean[i] = 0.5 * (q1.at(0, i) + q2.at(0, i));
    return mean;
}

}  // namespace

int dqn_act(const CriticPair& pair, const env::EnvState& state) {
    return env::action_from_index(argmax_lowest(mean_q_row(pair, state)));
}

double dqn_td_target(const CriticPair& pair, const replay::Transition& t,
                     double gamma) {
    if (t.done) return t.reward;
    const int a_idx = env::index_from_action(dqn_act(pair, t.next_state));
    const nn::SeqBatch batch = pack_states({&t.next_state});
    const nn::Matrix t1 = pair.target1->forward(batch);
    const nn::Matrix t2 = pair.target2->forward(batch);
    return t.reward + gamma * std::min(t1.at(0, a_idx), t2.at(0, a_idx));
}

nn::Matrix DqnAgent::Critic::qvalues(const nn::SeqBatch& states, bool with_tape) {
    if (!dueling) return q.forward(states, with_tape ? &tape_q : nullptr);

    torso_out = torso.forward(states, with_tape ? &tape_torso : nullptr);
    const nn::Matrix v = v_head.forward_vec(torso_out, with_tape ? &tape_v : nullptr);
    const nn::Matrix a = a_head.forward_vec(torso_out, with_tape ? &tape_a : nullptr);
    nn::Matrix out(a.rows, a.cols);
    for (std::size_t b = 0; b < a.rows; ++b) {
        double mean = 0.0;
        for (std::size_t i = 0; i < a.cols; ++i) mean += a.at(b, i);
        mean /= static_cast<double>(a.cols);
        for (std::size_t i = 0; i < a.cols; ++i)
            out.at(b, i) = v.at(b, 0) + (a.at(b, i) - mean);
    }
    return out;
}

void DqnAgent::Critic::backward(const nn::Matrix& dq, std::vector<double>& gq,
                                std::vector<double>& gt, std::vector<double>& gv,
                                std::vector<double>& ga) {
    if (!dueling) {
        q.backward(tape_q, dq, gq);
        return;
    }
    const std::size_t B = dq.rows, A = dq.cols;
    nn::Matrix dv(B, 1), da(B, A);
    for (std::size_t b = 0; b < B; ++b) {
        double sum = 0.0;
        for (std::size_t i = 0; i < A; ++i) sum += dq.at(b, i);
        dv.at(b, 0) = sum;
        const double mean = sum / static_cast<double>(A);
        for (std::size_t i = 0; i < A; ++i) da.at(b, i) = dq.at(b, i) - mean;
    }
    nn::Matrix din_v, din_a;
    v_head.backward_vec(tape_v, dv, gv, &din_v);
    a_head.backward_vec(tape_a, da, ga, &din_a);
    for (std::size_t i = 0; i < din_v.a.size(); ++i) din_v.a[i] += din_a.a[i];
    torso.backward(tape_torso, din_v, gt);
}

void DqnAgent::Critic::set_mode(nn::Mode m) {
    if (dueling) {
        torso.set_mode(m);
        v_head.set_mode(m);
        a_head.set_mode(m);
    } else {
        q.set_mode(m);
    }
}

DqnAgent::DqnAgent(const AgentConfig& cfg, std::size_t obs_dim, std::uint64_t seed)
    : cfg_(cfg) {
    cfg_.validate();
    const bool dueling = cfg.kind == AgentKind::kDuelingDqn ||
                         cfg.kind == AgentKind::kPrioritizedDuelingDqn;
    const bool prioritized = cfg.kind == AgentKind::kPrioritizedDqn ||
                             cfg.kind == AgentKind::kPrioritizedDuelingDqn;
    if (dueling && (cfg.head_units.empty() || cfg.dense_units.empty()))
        throw ConfigError("dueling config: dense_units and head_units must be set");

    for (int i = 0; i < 2; ++i) {
        Critic& c = online_[i];
        c.dueling = dueling;
        const std::uint64_t s =
            seed ^ Rng::fnv1a(i == 0 ? "critic1" : "critic2");
        if (!dueling) {
            nn::NetworkSpec spec;
            spec.input_dim = obs_dim;
            spec.recurrent_layers = cfg.recurrent_units;
            spec.dense_layers = cfg.dense_units;
            spec.output_dim = env::kNumActions;
            spec.dropout_rate = cfg.dropout;
            spec.layer_norm = cfg.layer_norm;
            c.q = nn::Network(spec, s);
            adam_[i].q = nn::OptimizerState(c.q.params().size(), cfg.learning_rate);
        } else {
            // Shared torso: recurrent stack plus the shared dense layer as a
            // ReLU output; V/A heads sit on top of it.
            nn::NetworkSpec torso;
            torso.input_dim = obs_dim;
            torso.recurrent_layers = cfg.recurrent_units;
            torso.dense_layers.assign(cfg.dense_units.begin(),
                                      cfg.dense_units.end() - 1);
            torso.output_dim = cfg.dense_units.back();
            torso.final_activation = nn::FinalActivation::kRelu;
            torso.dropout_rate = cfg.dropout;
            torso.layer_norm = cfg.layer_norm;
            c.torso = nn::Network(torso, s ^ Rng::fnv1a("torso"));

            nn::NetworkSpec head;
            head.input_dim = torso.output_dim;
            head.dense_layers = cfg.head_units;
            head.dropout_rate = cfg.dropout;
            head.output_dim = 1;
            c.v_head = nn::Network(head, s ^ Rng::fnv1a("v"));
            head.output_dim = env::kNumActions;
            c.a_head = nn::Network(head, s ^ Rng::fnv1a("a"));

            adam_[i].torso =
                nn::OptimizerState(c.torso.params().size(), cfg.learning_rate);
            adam_[i].v =
                nn::OptimizerState(c.v_head.params().size(), cfg.learning_rate);
            adam_[i].a =
                nn::OptimizerState(c.a_head.params().size(), cfg.learning_rate);
        }
        target_[i] = online_[i];  // exact copy at the outset
    }

    if (prioritized)
        prioritized_ = std::make_unique<replay::PrioritizedBuffer>(cfg.replay_capacity);
    else
        uniform_ = std::make_unique<replay::UniformBuffer>(cfg.replay_capacity);
}

nn::Matrix DqnAgent::online_mean_q(const nn::SeqBatch& states) {
    nn::Matrix q1 = online_[0].qvalues(states, false);
    const nn::Matrix q2 = online_[1].qvalues(states, false);
    for (std::size_t i = 0; i < q1.a.size(); ++i)
        q1.a[i] = 0.5 * (q1.a[i] + q2.a[i]);
    return q1;
}

int DqnAgent::act(const env::EnvState& state, Rng&) {
    for (auto& c : online_) c.set_mode(nn::Mode::kEval);
    const nn::SeqBatch batch = pack_states({&state});
    const nn::Matrix q = online_mean_q(batch);
    std::vector<double> row(q.a.begin(), q.a.begin() + q.cols);
    return env::action_from_index(argmax_lowest(row));
}

void DqnAgent::observe(replay::Transition t) {
    if (prioritized_)
        prioritized_->push_default(std::move(t));
    else
        uniform_->push(std::move(t));
}

std::size_t DqnAgent::stored() const {
    return prioritized_ ? prioritized_->size() : uniform_->size();
}

double DqnAgent::learn(Rng& rng) {
    const std::size_t B = cfg_.batch_size;
    std::vector<const replay::Transition*> batch;
    std::vector<std::size_t> indices;
    std::vector<double> weights(B, 1.0);
    if (prioritized_) {
        const auto samples = prioritized_->sample(B, rng);
        for (std::size_t i = 0; i < B; ++i) {
            batch.push_back(samples[i].transition);
            indices.push_back(samples[i].index);
            weights[i] = samples[i].weight;
        }
    } else {
        batch = uniform_->sample(B, rng);
    }

    std::vector<const env::EnvState*> cur, next;
    for (const auto* t : batch) {
        cur.push_back(&t->state);
        next.push_back(&t->next_state);
    }
    const nn::SeqBatch cur_batch = pack_states(cur);
    const nn::SeqBatch next_batch = pack_states(next);
    const double gamma = env::discount();

    // Action selection by the online mean policy, evaluation by the minimum
    // of the two targets.
    for (auto& c : online_) c.set_mode(nn::Mode::kEval);
    for (auto& c : target_) c.set_mode(nn::Mode::kEval);
    const nn::Matrix mean_next = online_mean_q(next_batch);
    std::vector<int> a_next(B);
    for (std::size_t b = 0; b < B; ++b) {
        std::vector<double> row(mean_next.row(b), mean_next.row(b) + mean_next.cols);
        a_next[b] = argmax_lowest(row);
    }
    const nn::Matrix t1 = target_[0].qvalues(next_batch, false);
    const nn::Matrix t2 = target_[1].qvalues(next_batch, false);
    std::vector<double> y(B);
    for (std::size_t b = 0; b < B; ++b) {
        y[b] = batch[b]->reward;
        if (!batch[b]->done)
            y[b] += gamma * std::min(t1.at(b, a_next[b]), t2.at(b, a_next[b]));
    }

    for (auto& c : online_) c.set_mode(nn::Mode::kTrain);
    double loss = 0.0;
    std::vector<double> td2_sum(B, 0.0);
    for (int i = 0; i < 2; ++i) {
        Critic& c = online_[i];
        const nn::Matrix q = c.qvalues(cur_batch, true);
        nn::Matrix dq(B, q.cols);
        for (std::size_t b = 0; b < B; ++b) {
            const int a_idx = env::index_from_action(batch[b]->action);
            const double delta = q.at(b, a_idx) - y[b];
            loss += weights[b] * delta * delta / static_cast<double>(B);
            td2_sum[b] += delta * delta;
            dq.at(b, a_idx) =
                2.0 * weights[b] * delta / static_cast<double>(B);
        }
        if (!c.dueling) {
            std::vector<double> gq(c.q.params().size(), 0.0), unused;
            c.backward(dq, gq, unused, unused, unused);
            nn::adam_step(c.q.params(), gq, adam_[i].q);
        } else {
            std::vector<double> gq, gt(c.torso.params().size(), 0.0),
                gv(c.v_head.params().size(), 0.0), ga(c.a_head.params().size(), 0.0);
            c.backward(dq, gq, gt, gv, ga);
            nn::adam_step(c.torso.params(), gt, adam_[i].torso);
            nn::adam_step(c.v_head.params(), gv, adam_[i].v);
            nn::adam_step(c.a_head.params(), ga, adam_[i].a);
        }
    }

    if (prioritized_) {
        std::vector<double> prios(B);
        for (std::size_t b = 0; b < B; ++b) prios[b] = 0.5 * td2_sum[b];
        prioritized_->update_priorities(indices, prios);
    }

    for (int i = 0; i < 2; ++i) {
        if (!online_[i].dueling) {
            nn::soft_update(target_[i].q, online_[i].q, cfg_.tau);
        } else {
            nn::soft_update(target_[i].torso, online_[i].torso, cfg_.tau);
            nn::soft_update(target_[i].v_head, online_[i].v_head, cfg_.tau);
            nn::soft_update(target_[i].a_head, online_[i].a_head, cfg_.tau);
        }
    }
    return loss;
}

std::vector<std::pair<std::string, nn::Network*>> DqnAgent::named_networks() {
    std::vector<std::pair<std::string, nn::Network*>> out;
    for (int i = 0; i < 2; ++i) {
        const std::string tag = i == 0 ? "1" : "2";
        if (!online_[i].dueling) {
            out.emplace_back("q" + tag, &online_[i].q);
            out.emplace_back("q" + tag + "_target", &target_[i].q);
        } else {
            out.emplace_back("torso" + tag, &online_[i].torso);
            out.emplace_back("v" + tag, &online_[i].v_head);
            out.emplace_back("a" + tag, &online_[i].a_head);
            out.emplace_back("torso" + tag + "_target", &target_[i].torso);
            out.emplace_back("v" + tag + "_target", &target_[i].v_head);
            out.emplace_back("a" + tag + "_target", &target_[i].a_head);
        }
    }
    return out;
}

}  // namespace gasrl::agents
