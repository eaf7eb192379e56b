#include "gasrl/replay/buffer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gasrl/errors.hpp"

namespace gasrl::replay {

void Transition::validate() const {
    if (action < -env::kMaxTrade || action > env::kMaxTrade)
        throw ConfigError("transition: action outside [-3,3]");
    if (!std::isfinite(reward))
        throw NumericFault("transition: non-finite reward");
}

UniformBuffer::UniformBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay buffer: capacity must be >= 1");
    storage_.reserve(std::min<std::size_t>(capacity, 4096));
}

void UniformBuffer::push(Transition t) {
    t.validate();
    if (count_ < capacity_) {
        storage_.push_back(std::move(t));
        ++count_;
    } else {
        storage_[write_] = std::move(t);
    }
    write_ = (write_ + 1) % capacity_;
}

std::vector<const Transition*> UniformBuffer::sample(std::size_t batch_size,
                                                     Rng& rng) const {
    if (count_ == 0) throw ConfigError("replay buffer: sampling from empty buffer");
    if (batch_size > count_)
        throw ConfigError("replay buffer: batch size " + std::to_string(batch_size) +
                          " exceeds stored count " + std::to_string(count_));
    std::vector<const Transition*> out;
    out.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i)
        out.push_back(&storage_[rng.uniform_int(count_)]);
    return out;
}

PrioritizedBuffer::PrioritizedBuffer(std::size_t capacity)
    : capacity_(capacity), tree_(capacity) {
    if (capacity == 0) throw ConfigError("replay buffer: capacity must be >= 1");
    storage_.reserve(std::min<std::size_t>(capacity, 4096));
}

void PrioritizedBuffer::push(Transition t, double priority) {
    t.validate();
    if (!(priority >= 0.0) || !std::isfinite(priority))
        throw ConfigError("prioritized replay: priority must be finite and >= 0");
    if (count_ < capacity_) {
        storage_.push_back(std::move(t));
        ++count_;
    } else {
        storage_[write_] = std::move(t);
    }
    tree_.update(write_, priority);
    write_ = (write_ + 1) % capacity_;
}

void PrioritizedBuffer::push_default(Transition t) {
    const double p = count_ == 0 ? 1.0 : tree_.max_leaf();
    push(std::move(t), p > 0.0 ? p : 1.0);
}

std::vector<PrioritizedBuffer::Sample> PrioritizedBuffer::sample(
    std::size_t batch_size, Rng& rng) const {
    if (count_ == 0) throw ConfigError("prioritized replay: buffer is empty");
    if (batch_size > count_)
        throw ConfigError("prioritized replay: batch size exceeds stored count");
    const double total = tree_.total();
    if (!(total > 0.0))
        throw NumericFault("prioritized replay: total priority mass is zero");

    std::vector<Sample> out;
    out.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
        const double u = rng.uniform() * total;
        const std::size_t idx = tree_.find_prefix(u);
        Sample s;
        s.index = idx;
        s.transition = &storage_[idx];
        s.weight = 1.0;
        if (is_exponent_ > 0.0) {
            const double prob = tree_.leaf(idx) / total;
            s.weight = std::pow(1.0 / (static_cast<double>(count_) * prob),
                                is_exponent_);
        }
        out.push_back(s);
    }
    if (is_exponent_ > 0.0) {
        double wmax = 0.0;
        for (const auto& s : out) wmax = std::max(wmax, s.weight);
        if (wmax > 0.0)
            for (auto& s : out) s.weight /= wmax;
    }
    return out;
}

void PrioritizedBuffer::update_priorities(const std::vector<std::size_t>& indices,
                                          const std::vector<double>& priorities) {
    if (indices.size() != priorities.size())
        throw ConfigError("prioritized replay: index/priority length mismatch");
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= count_)
            throw ConfigError("prioritized replay: index " +
                              std::to_string(indices[i]) + " out of range");
        if (!(priorities[i] >= 0.0) || !std::isfinite(priorities[i]))
            throw ConfigError("prioritized replay: priority must be finite and >= 0");
        tree_.update(indices[i], priorities[i]);
    }
}

void PrioritizedBuffer::set_is_exponent(double beta) {
    if (!(beta >= 0.0 && beta <= 1.0))
        throw ConfigError("prioritized replay: IS exponent must lie in [0,1]");
    is_exponent_ = beta;
}

}  // namespace gasrl::replay
