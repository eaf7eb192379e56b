#include "gasrl/agents/extra_trees.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "gasrl/errors.hpp"
#include "gasrl/rng.hpp"

namespace gasrl::agents {

namespace {

double gini(std::size_t n0, std::size_t n1) {
    const double n = static_cast<double>(n0 + n1);
    if (n == 0.0) return 0.0;
    const double p0 = n0 / n, p1 = n1 / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

struct TreeBuilder {
    const std::vector<std::vector<double>>& rows;
    const std::vector<int>& labels;
    int min_samples_split;
    int n_candidates;
    Rng& rng;
    std::vector<ExtraTreesModel::Node>& nodes;

    int build(std::vector<std::size_t>& idx) {
        std::size_t n1 = 0;
        for (const auto i : idx) n1 += static_cast<std::size_t>(labels[i]);
        const std::size_t n0 = idx.size() - n1;

        const auto make_leaf = [&]() {
            ExtraTreesModel::Node leaf;
            leaf.label = n1 > n0 ? 1 : 0;
            nodes.push_back(leaf);
            return static_cast<int>(nodes.size() - 1);
        };
        if (n0 == 0 || n1 == 0 ||
            idx.size() < static_cast<std::size_t>(min_samples_split))
            return make_leaf();

        const std::size_t f_dim = rows[0].size();
        int best_feature = -1;
        double best_cut = 0.0, best_gain = -1.0;
        const double parent = gini(n0, n1);
        for (int c = 0; c < n_candidates; ++c) {
            const auto f = static_cast<std::size_t>(rng.uniform_int(f_dim));
            double lo = rows[idx[0]][f], hi = lo;
            for (const auto i : idx) {
                lo = std::min(lo, rows[i][f]);
                hi = std::max(hi, rows[i][f]);
            }
            if (!(hi > lo)) continue;  // constant feature in this node
            const double cut = rng.uniform(lo, hi);
            std::size_t l0 = 0, l1 = 0, r0 = 0, r1 = 0;
            for (const auto i : idx) {
                if (rows[i][f] < cut)
                    (labels[i] ? l1 : l0) += 1;
                else
                    (labels[i] ? r1 : r0) += 1;
            }
            if (l0 + l1 == 0 || r0 + r1 == 0) continue;
            const double nl = static_cast<double>(l0 + l1),
                         nr = static_cast<double>(r0 + r1),
                         nt = static_cast<double>(idx.size());
            const double gain =
                parent - (nl / nt) * gini(l0, l1) - (nr / nt) * gini(r0, r1);
            if (gain > best_gain) {
                best_gain = gain;
                best_feature = static_cast<int>(f);
                best_cut = cut;
            }
        }
        if (best_feature < 0) return make_leaf();

        std::vector<std::size_t> left, right;
        for (const auto i : idx)
            (rows[i][static_cast<std::size_t>(best_feature)] < best_cut ? left
                                                                        : right)
                .push_back(i);
        ExtraTreesModel::Node node;
        node.feature = best_feature;
        node.threshold = best_cut;
        nodes.push_back(node);
        const auto self = static_cast<int>(nodes.size() - 1);
        const int l = build(left);
        const int r = build(right);
        nodes[self].left = l;
        nodes[self].right = r;
        return self;
    }
};

}  // namespace

ExtraTreesModel extra_trees_fit(const std::vector<std::vector<double>>& rows,
                                const std::vector<int>& labels,
                                const ExtraTreesParams& params,
                                std::uint64_t seed) {
    if (rows.size() < 2) throw DataError("extra_trees_fit: need at least 2 rows");
    if (rows.size() != labels.size())
        throw ConfigError("extra_trees_fit: rows/labels length mismatch");
    bool has0 = false, has1 = false;
    for (const int y : labels) {
        if (y == 0) has0 = true;
        else if (y == 1) has1 = true;
        else throw ConfigError("extra_trees_fit: labels must be 0 or 1");
    }
    if (!has0 || !has1)
        throw DataError("extra_trees_fit: training data contains a single class");
    const std::size_t f_dim = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != f_dim)
            throw DataError("extra_trees_fit: inconsistent feature dims");

    ExtraTreesModel model;
    model.feature_dim = f_dim;
    model.trees.resize(params.n_trees);
    const int n_candidates =
        std::max(1, static_cast<int>(std::lround(std::sqrt(f_dim))));
    Rng master(seed, "extra_trees");
    for (int t = 0; t < params.n_trees; ++t) {
        Rng tree_rng = master.fork(static_cast<std::uint64_t>(t));
        std::vector<std::size_t> idx(rows.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        TreeBuilder builder{rows,     labels,   params.min_samples_split,
                            n_candidates, tree_rng, model.trees[t]};
        builder.build(idx);
    }
    return model;
}

int extra_trees_predict(const ExtraTreesModel& model,
                        const std::vector<double>& o) {
    if (o.size() != model.feature_dim)
        throw ConfigError("extra_trees_predict: feature dim mismatch");
    std::size_t votes1 = 0;
    for (const auto& tree : model.trees) {
        int at = 0;
        while (tree[at].feature >= 0)
            at = o[static_cast<std::size_t>(tree[at].feature)] <
                         tree[at].threshold
                     ? tree[at].left
                     : tree[at].right;
        votes1 += static_cast<std::size_t>(tree[at].label);
    }
    return 2 * votes1 > model.trees.size() ? 1 : 0;
}

int extra_trees_action(int y_hat, bool symmetric) {
    if (y_hat != 0 && y_hat != 1)
        throw ConfigError("extra_trees_action: prediction must be 0 or 1");
    if (symmetric) return y_hat ? 3 : -3;
    return 3 * y_hat;
}

void save_extra_trees(const ExtraTreesModel& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open " + path + " for writing");
    const char magic[8] = {'G', 'A', 'S', 'R', 'L', 'T', 'R', 'E'};
    os.write(magic, 8);
    auto put_u64 = [&](std::uint64_t v) {
        os.write(reinterpret_cast<const char*>(&v), sizeof(v));
    };
    put_u64(model.feature_dim);
    put_u64(model.trees.size());
    for (const auto& tree : model.trees) {
        put_u64(tree.size());
        for (const auto& n : tree) {
            os.write(reinterpret_cast<const char*>(&n.feature), sizeof(n.feature));
            os.write(reinterpret_cast<const char*>(&n.threshold),
                     sizeof(n.threshold));
            os.write(reinterpret_cast<const char*>(&n.left), sizeof(n.left));
            os.write(reinterpret_cast<const char*>(&n.right), sizeof(n.right));
            os.write(reinterpret_cast<const char*>(&n.label), sizeof(n.label));
        }
    }
    if (!os) throw DataError("write failed for " + path);
}

ExtraTreesModel load_extra_trees(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::string(magic, 8) != "GASRLTRE")
        throw DataError(path + ": bad extra-trees checkpoint magic");
    auto get_u64 = [&]() {
        std::uint64_t v = 0;
        is.read(reinterpret_cast<char*>(&v), sizeof(v));
        if (!is) throw DataError(path + ": truncated extra-trees checkpoint");
        return v;
    };
    ExtraTreesModel model;
    model.feature_dim = get_u64();
    model.trees.resize(get_u64());
    for (auto& tree : model.trees) {
        tree.resize(get_u64());
        for (auto& n : tree) {
            is.read(reinterpret_cast<char*>(&n.feature), sizeof(n.feature));
            is.read(reinterpret_cast<char*>(&n.threshold), sizeof(n.threshold));
            is.read(reinterpret_cast<char*>(&n.left), sizeof(n.left));
            is.read(reinterpret_cast<char*>(&n.right), sizeof(n.right));
            is.read(reinterpret_cast<char*>(&n.label), sizeof(n.label));
        }
        if (!is) throw DataError(path + ": truncated extra-trees checkpoint");
    }
    return model;
}

}  // namespace gasrl::agents
