#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "noisecal/models.hpp"

namespace noisecal {

namespace {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double reduction = 0.0;
};

// Exhaustive search over (feature, midpoint threshold); ties resolve to the
// lowest feature index, then the lowest threshold, via strict comparison in
// ascending scan order.
SplitChoice best_split(const Matrix& X, std::span<const double> y,
                       std::span<const std::size_t> idx, std::span<const int> features,
                       std::size_t min_leaf) {
    SplitChoice best;
    const std::size_t m = idx.size();
    if (m < 2 * min_leaf) return best;

    double ysum = 0.0, ysq = 0.0;
    for (const std::size_t i : idx) {
        ysum += y[i];
        ysq += y[i] * y[i];
    }
    const double parent_sse = ysq - ysum * ysum / static_cast<double>(m);

    std::vector<std::size_t> order(idx.begin(), idx.end());
    for (const int f : features) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return X(a, static_cast<std::size_t>(f)) < X(b, static_cast<std::size_t>(f));
        });
        double lsum = 0.0, lsq = 0.0;
        for (std::size_t k = 0; k + 1 < m; ++k) {
            const std::size_t i = order[k];
            lsum += y[i];
            lsq += y[i] * y[i];
            const std::size_t nl = k + 1, nr = m - nl;
            if (nl < min_leaf || nr < min_leaf) continue;
            const double xa = X(order[k], static_cast<std::size_t>(f));
            const double xb = X(order[k + 1], static_cast<std::size_t>(f));
            if (xb <= xa) continue;
            const double rsum = ysum - lsum, rsq = ysq - lsq;
            const double sse = (lsq - lsum * lsum / static_cast<double>(nl)) +
                               (rsq - rsum * rsum / static_cast<double>(nr));
            const double reduction = parent_sse - sse;
            if (!best.found || reduction > best.reduction) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (xa + xb);
                best.reduction = reduction;
            }
        }
    }
    if (best.found && best.reduction <= 1e-12 * std::max(1.0, parent_sse)) best.found = false;
    return best;
}

struct TreeBuilder {
    const Matrix& X;
    std::span<const double> y;
    int max_depth;
    std::size_t min_leaf;
    int feature_subset;       // features sampled per split; == p takes all
    std::mt19937_64* rng;     // null when all features are always used
    TreeParams tree;

    int build(std::vector<std::size_t>& idx, int depth) {
        const int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        double mean = 0.0;
        for (const std::size_t i : idx) mean += y[i];
        mean /= static_cast<double>(idx.size());

        SplitChoice split;
        if (depth < max_depth && idx.size() >= 2 * min_leaf) {
            const auto p = static_cast<int>(X.cols);
            std::vector<int> feats(static_cast<std::size_t>(p));
            std::iota(feats.begin(), feats.end(), 0);
            if (rng && feature_subset < p) {
                std::shuffle(feats.begin(), feats.end(), *rng);
                feats.resize(static_cast<std::size_t>(feature_subset));
                std::sort(feats.begin(), feats.end());
            }
            split = best_split(X, y, idx, feats, min_leaf);
        }
        if (!split.found) {
            tree.nodes[static_cast<std::size_t>(node_id)].value = mean;
            return node_id;
        }

        std::vector<std::size_t> left, right;
        for (const std::size_t i : idx) {
            if (X(i, static_cast<std::size_t>(split.feature)) < split.threshold)
                left.push_back(i);
            else
                right.push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        TreeNode& n = tree.nodes[static_cast<std::size_t>(node_id)];
        n.feature = split.feature;
        n.threshold = split.threshold;
        n.left = l;
        n.right = r;
        return node_id;
    }
};

void finish_tree_model(Model& m, const Dataset& d) {
    m.y_min = *std::min_element(d.y.begin(), d.y.end());
    m.y_max = *std::max_element(d.y.begin(), d.y.end());
    const auto pred = m.predict(d.X);
    m.residuals.resize(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) m.residuals[i] = d.y[i] - pred[i];
}

}  // namespace

Model fit_dt(const Dataset& d, int max_depth, int min_leaf) {
    d.validate();
    if (max_depth < 1) throw Error("fit_dt: max_depth must be >= 1");
    if (min_leaf < 1) throw Error("fit_dt: min_leaf must be >= 1");
    if (d.n() < 2 * static_cast<std::size_t>(min_leaf))
        throw Error("fit_dt: need at least 2*min_leaf samples");

    TreeBuilder builder{d.X, d.y, max_depth, static_cast<std::size_t>(min_leaf),
                        static_cast<int>(d.p()), nullptr, {}};
    std::vector<std::size_t> idx(d.n());
    std::iota(idx.begin(), idx.end(), 0);
    builder.build(idx, 0);

    Model m;
    m.family = Family::Dt;
    m.hyperparams = {{"max_depth", static_cast<double>(max_depth)},
                     {"min_leaf", static_cast<double>(min_leaf)}};
    m.n_features = d.p();
    m.params = std::move(builder.tree);
    finish_tree_model(m, d);
    return m;
}

Model fit_rfr(const Dataset& d, int n_trees, int max_depth, int feature_subset, bool bootstrap,
              std::uint64_t seed) {
    d.validate();
    if (n_trees < 1) throw Error("fit_rfr: n_trees must be >= 1");
    if (max_depth < 1) throw Error("fit_rfr: max_depth must be >= 1");
    const int min_leaf = 5;
    if (d.n() < 2 * static_cast<std::size_t>(min_leaf))
        throw Error("fit_rfr: need at least 2*min_leaf samples");
    feature_subset = std::clamp(feature_subset, 1, static_cast<int>(d.p()));

    ForestParams forest;
    forest.trees.resize(static_cast<std::size_t>(n_trees));
    for (int t = 0; t < n_trees; ++t) {
        // Per-tree RNG stream derived from (seed, tree index) so any
        // parallel schedule reproduces the serial result.
        std::seed_seq seq{seed, static_cast<std::uint64_t>(t)};
        std::mt19937_64 rng(seq);

        std::vector<std::size_t> idx(d.n());
        if (bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, d.n() - 1);
            for (auto& i : idx) i = pick(rng);
        } else {
            std::iota(idx.begin(), idx.end(), 0);
        }
        const bool subsample_features = feature_subset < static_cast<int>(d.p());
        TreeBuilder builder{d.X,
                            d.y,
                            max_depth,
                            static_cast<std::size_t>(min_leaf),
                            feature_subset,
                            subsample_features ? &rng : nullptr,
                            {}};
        builder.build(idx, 0);
        forest.trees[static_cast<std::size_t>(t)] = std::move(builder.tree);
    }

    Model m;
    m.family = Family::Rfr;
    m.hyperparams = {{"n_trees", static_cast<double>(n_trees)},
                     {"max_depth", static_cast<double>(max_depth)},
                     {"feature_subset", static_cast<double>(feature_subset)},
                     {"bootstrap", bootstrap ? 1.0 : 0.0},
                     {"seed", static_cast<double>(seed)}};
    m.n_features = d.p();
    m.params = std::move(forest);
    finish_tree_model(m, d);
    return m;
}

}  // namespace noisecal
