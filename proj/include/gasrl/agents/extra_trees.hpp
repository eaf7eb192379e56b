#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gasrl::agents {

// Extremely randomized trees, binary classification. Every tree sees the full
// training set (no bootstrap); each node draws sqrt(F) candidate features and
// one uniform-random cut point per candidate, keeping the best Gini reduction.
struct ExtraTreesModel {
    struct Node {
        int feature = -1;       // -1 marks a leaf
        double threshold = 0.0;
        int left = -1, right = -1;
        int label = -1;         // leaf majority class
    };
    std::vector<std::vector<Node>> trees;
    std::size_t feature_dim = 0;
};

struct ExtraTreesParams {
    int n_trees = 100;
    int min_samples_split = 2;
};

// Labels must contain both classes (0 and 1).
ExtraTreesModel extra_trees_fit(const std::vector<std::vector<double>>& rows,
                                const std::vector<int>& labels,
                                const ExtraTreesParams& params,
                                std::uint64_t seed);

// Majority vote over trees; ties resolve to class 0.
int extra_trees_predict(const ExtraTreesModel& model,
                        const std::vector<double>& o);

// Direction prediction to trade size: literally a = 3*y (a predicted fall
// holds), or the symmetric variant a = 3*(2y - 1) behind the flag.
int extra_trees_action(int y_hat, bool symmetric);

void save_extra_trees(const ExtraTreesModel& model, const std::string& path);
ExtraTreesModel load_extra_trees(const std::string& path);

}  // namespace gasrl::agents
