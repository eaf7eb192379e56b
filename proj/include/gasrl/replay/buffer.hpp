#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "gasrl/env/trading_env.hpp"
#include "gasrl/replay/sum_tree.hpp"
#include "gasrl/rng.hpp"

namespace gasrl::replay {

// The replay unit.
struct Transition {
    env::EnvState state;
    int action = 0;  // contract count in [-3,3]
    double reward = 0.0;
    env::EnvState next_state;
    bool done = false;

    void validate() const;
};

// Uniform ring buffer with i.i.d. with-replacement sampling.
class UniformBuffer {
public:
    explicit UniformBuffer(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return count_; }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return storage_[i]; }

    std::vector<const Transition*> sample(std::size_t batch_size, Rng& rng) const;

private:
    std::size_t capacity_;
    std::vector<Transition> storage_;
    std::size_t write_ = 0;
    std::size_t count_ = 0;
};

// Proportional prioritized replay on a sum tree. Slot i is sampled with
// probability priority_i / total. No importance-sampling correction is
// applied unless an exponent is set (default off: pure proportional draws).
class PrioritizedBuffer {
public:
    explicit PrioritizedBuffer(std::size_t capacity);

    // Stores with an explicit priority (>= 0, finite).
    void push(Transition t, double priority);
    // Stores with the current maximum leaf priority (1 if empty), so fresh
    // transitions are sampled at least once.
    void push_default(Transition t);

    std::size_t size() const { return count_; }
    double total_priority() const { return tree_.total(); }
    const SumTree& tree() const { return tree_; }
    const Transition& at(std::size_t i) const { return storage_[i]; }

    struct Sample {
        std::size_t index;
        const Transition* transition;
        double weight;  // importance weight, 1.0 when correction is off
    };
    std::vector<Sample> sample(std::size_t batch_size, Rng& rng) const;

    void update_priorities(const std::vector<std::size_t>& indices,
                           const std::vector<double>& priorities);

    // Importance-sampling exponent; 0 disables the correction.
    void set_is_exponent(double beta);
    double is_exponent() const { return is_exponent_; }

private:
    std::size_t capacity_;
    std::vector<Transition> storage_;
    SumTree tree_;
    std::size_t write_ = 0;
    std::size_t count_ = 0;
    double is_exponent_ = 0.0;
};

}  // namespace gasrl::replay
