#include "gasrl/replay/sum_tree.hpp"

#include <cmath>
#include <string>

#include "gasrl/errors.hpp"

namespace gasrl::replay {

SumTree::SumTree(std::size_t capacity) {
    if (capacity == 0) throw ConfigError("sum tree: capacity must be >= 1");
    std::size_t c = 1;
    while (c < capacity) c <<= 1;
    capacity_ = c;
    nodes_.assign(2 * c - 1, 0.0);
}

double SumTree::leaf(std::size_t i) const {
    if (i >= capacity_) throw ConfigError("sum tree: leaf index out of range");
    return nodes_[capacity_ - 1 + i];
}

void SumTree::update(std::size_t i, double p) {
    if (i >= capacity_) throw ConfigError("sum tree: leaf index out of range");
    if (!(p >= 0.0) || !std::isfinite(p))
        throw ConfigError("sum tree: priority must be finite and >= 0");
    std::size_t idx = capacity_ - 1 + i;
    const double delta = p - nodes_[idx];
    nodes_[idx] = p;
    last_op_touches_ = 1;
    while (idx > 0) {
        idx = (idx - 1) / 2;
        nodes_[idx] += delta;
        ++last_op_touches_;
    }
}

std::size_t SumTree::find_prefix(double u) const {
    std::size_t idx = 0;
    last_op_touches_ = 1;
    while (idx < capacity_ - 1) {
        const std::size_t left = 2 * idx + 1;
        ++last_op_touches_;
        if (u < nodes_[left]) {
            idx = left;
        } else {
            u -= nodes_[left];
            idx = left + 1;
        }
    }
    return idx - (capacity_ - 1);
}

double SumTree::max_leaf() const {
    double m = 0.0;
    for (std::size_t i = 0; i < capacity_; ++i)
        m = std::max(m, nodes_[capacity_ - 1 + i]);
    return m;
}

std::vector<double> SumTree::rebuilt_nodes() const {
    std::vector<double> fresh(nodes_.size(), 0.0);
    for (std::size_t i = 0; i < capacity_; ++i)
        fresh[capacity_ - 1 + i] = nodes_[capacity_ - 1 + i];
    for (std::size_t idx = capacity_ - 1; idx-- > 0;)
        fresh[idx] = fresh[2 * idx + 1] + fresh[2 * idx + 2];
    return fresh;
}

}  // namespace gasrl::replay
