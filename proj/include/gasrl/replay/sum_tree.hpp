#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gasrl::replay {

// Complete binary tree over a power-of-two number of leaves. Leaves hold
// priorities, internal nodes hold the sum of their children, the root holds
// the total mass. Update and prefix lookup touch one root-to-leaf path, so
// both are O(log capacity). `node_touches` counts node reads/writes per
// operation for the complexity tests.
class SumTree {
public:
    explicit SumTree(std::size_t capacity);  // rounded up to a power of two

    std::size_t capacity() const { return capacity_; }
    double total() const { return nodes_[0]; }
    double leaf(std::size_t i) const;

    // Set leaf i to priority p (>= 0, finite) and fix all ancestor sums.
    void update(std::size_t i, double p);

    // Index of the leaf whose prefix-sum interval contains u in [0, total).
    std::size_t find_prefix(double u) const;

    double max_leaf() const;

    // Node reads/writes performed by the most recent update/find_prefix call.
    std::size_t last_op_touches() const { return last_op_touches_; }

    // Recompute every internal node from the leaves (brute-force oracle).
    std::vector<double> rebuilt_nodes() const;
    const std::vector<double>& nodes() const { return nodes_; }

private:
    std::size_t capacity_ = 0;
    std::vector<double> nodes_;  // size 2*capacity - 1, leaves at capacity-1..
    mutable std::size_t last_op_touches_ = 0;
};

}  // namespace gasrl::replay
