#include "gasrl/agents/policy.hpp"

#include <cstring>

#include "gasrl/errors.hpp"

namespace gasrl::agents {

int argmax_lowest(const std::vector<double>& scores) {
    if (scores.empty()) throw ConfigError("argmax over empty score vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return static_cast<int>(best);
}

int epsilon_greedy(int base_action, double epsilon, Rng& rng) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
        throw ConfigError("epsilon_greedy: epsilon must lie in [0,1]");
    if (base_action < -env::kMaxTrade || base_action > env::kMaxTrade)
        throw ConfigError("epsilon_greedy: base action outside [-3,3]");
    if (epsilon > 0.0 && rng.uniform() < epsilon)
        return env::action_from_index(
            static_cast<int>(rng.uniform_int(env::kNumActions)));
    return base_action;
}

nn::SeqBatch pack_states(const std::vector<const env::EnvState*>& states) {
    if (states.empty()) throw ConfigError("pack_states: empty batch");
    const std::size_t dim = states[0]->dim();
    nn::SeqBatch batch(states.size(), env::kWindow, dim);
    for (std::size_t b = 0; b < states.size(); ++b) {
        if (states[b]->dim() != dim)
            throw ConfigError("pack_states: inconsistent state dims");
        std::memcpy(batch.at(b, 0), states[b]->window.at(0, 0),
                    env::kWindow * dim * sizeof(double));
    }
    return batch;
}

}  // namespace gasrl::agents
