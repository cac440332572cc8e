#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "radsurv/dataset.hpp"
#include "radsurv/errors.hpp"

namespace radsurv {

/// Row-major feature matrix with integer class labels.
struct LabeledMatrix {
    std::size_t n_features = 0;
    std::vector<double> x;   // n_rows * n_features
    std::vector<int> y;

    std::size_t n_rows() const { return y.size(); }
    const double* row(std::size_t i) const { return x.data() + i * n_features; }
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline double gini(const std::array<std::size_t, kNumClasses>& counts,
                   std::size_t total) {
    if (total == 0) return 0;
    double g = 1.0;
    for (auto c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        g -= p * p;
    }
    return g;
}

} // namespace detail

struct TreeNode {
    int feature = -1;            // -1 = leaf
    double threshold = 0;        // x[feature] <= threshold goes left
    int left = -1, right = -1;
    int label = 0;               // leaf plurality, ties to the lowest class
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    int predict(const double* x) const {
        int id = 0;
        while (nodes[id].feature >= 0)
            id = x[nodes[id].feature] <= nodes[id].threshold
                     ? nodes[id].left
                     : nodes[id].right;
        return nodes[id].label;
    }

    std::size_t internal_count() const {
        std::size_t n = 0;
        for (const auto& nd : nodes) n += (nd.feature >= 0);
        return n;
    }
};

namespace detail {

struct SplitResult {
    bool found = false;
    int feature = -1;
    double threshold = 0;
    double gain = 0;
};

inline SplitResult best_split(const LabeledMatrix& data,
                              const std::vector<std::size_t>& idx,
                              const std::vector<int>& features) {
    std::array<std::size_t, kNumClasses> total_counts{};
    for (auto i : idx) ++total_counts[static_cast<std::size_t>(data.y[i])];
    const double parent = gini(total_counts, idx.size());
    const auto n = static_cast<double>(idx.size());

    SplitResult best;
    std::vector<std::pair<double, int>> vals;
    vals.reserve(idx.size());
    for (int f : features) {
        vals.clear();
        for (auto i : idx)
            vals.emplace_back(data.row(i)[f], data.y[i]);
        std::sort(vals.begin(), vals.end());
        std::array<std::size_t, kNumClasses> left{};
        std::size_t nl = 0;
        for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
            ++left[static_cast<std::size_t>(vals[k].second)];
            ++nl;
            if (vals[k].first == vals[k + 1].first) continue;
            std::array<std::size_t, kNumClasses> right{};
            for (int c = 0; c < kNumClasses; ++c)
                right[c] = total_counts[c] - left[c];
            const std::size_t nr = idx.size() - nl;
            const double g = parent -
                             (static_cast<double>(nl) / n) * gini(left, nl) -
                             (static_cast<double>(nr) / n) * gini(right, nr);
            if (g > best.gain + 1e-15) {
                best.found = true;
                best.gain = g;
                best.feature = f;
                best.threshold = vals[k].first +
                                 0.5 * (vals[k + 1].first - vals[k].first);
            }
        }
    }
    if (best.found && best.gain <= 1e-12) best.found = false;
    return best;
}

} // namespace detail

/// Grows a CART classifier with Gini impurity, breadth-first, stopping at
/// `max_splits` internal nodes or pure leaves. When `mtry > 0`, each node
/// considers a random sample of `mtry` candidate features drawn from `rng`.
inline DecisionTree grow_tree(const LabeledMatrix& data,
                              const std::vector<std::size_t>& row_idx,
                              std::size_t max_splits, int mtry = 0,
                              std::mt19937_64* rng = nullptr) {
    DecisionTree tree;
    const int F = static_cast<int>(data.n_features);

    auto make_leaf = [&](const std::vector<std::size_t>& idx) {
        std::array<std::size_t, kNumClasses> counts{};
        for (auto i : idx) ++counts[static_cast<std::size_t>(data.y[i])];
        int lab = 0;
        for (int c = 1; c < kNumClasses; ++c)
            if (counts[c] > counts[lab]) lab = c;
        return lab;
    };
    auto is_pure = [&](const std::vector<std::size_t>& idx) {
        for (std::size_t k = 1; k < idx.size(); ++k)
            if (data.y[idx[k]] != data.y[idx[0]]) return false;
        return true;
    };

    struct Pending {
        int node_id;
        std::vector<std::size_t> idx;
    };
    tree.nodes.emplace_back();
    std::deque<Pending> queue;
    queue.push_back({0, row_idx});
    std::size_t internal = 0;

    std::vector<int> all_features(static_cast<std::size_t>(F));
    std::iota(all_features.begin(), all_features.end(), 0);

    while (!queue.empty()) {
        Pending p = std::move(queue.front());
        queue.pop_front();
        TreeNode& node = tree.nodes[static_cast<std::size_t>(p.node_id)];
        if (p.idx.size() < 2 || internal >= max_splits || is_pure(p.idx)) {
            node.label = make_leaf(p.idx);
            continue;
        }
        detail::SplitResult split;
        if (mtry > 0 && mtry < F && rng) {
            std::vector<int> cand(all_features);
            for (int k = 0; k < mtry; ++k) {
                std::uniform_int_distribution<int> d(k, F - 1);
                std::swap(cand[k], cand[d(*rng)]);
            }
            cand.resize(static_cast<std::size_t>(mtry));
            std::sort(cand.begin(), cand.end());
            split = detail::best_split(data, p.idx, cand);
        } else {
            split = detail::best_split(data, p.idx, all_features);
        }
        if (!split.found) {
            node.label = make_leaf(p.idx);
            continue;
        }
        std::vector<std::size_t> li, ri;
        for (auto i : p.idx)
            (data.row(i)[split.feature] <= split.threshold ? li : ri)
                .push_back(i);
        if (li.empty() || ri.empty()) {
            node.label = make_leaf(p.idx);
            continue;
        }
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = static_cast<int>(tree.nodes.size());
        node.right = node.left + 1;
        const int l = node.left, r = node.right;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        queue.push_back({l, std::move(li)});
        queue.push_back({r, std::move(ri)});
        ++internal;
    }
    return tree;
}

/// Bagged forest of fully grown CART trees with per-node feature sampling
/// and recorded out-of-bag membership. Tree t's randomness derives only
/// from (seed, t).
struct RandomForest {
    std::vector<DecisionTree> trees;
    std::vector<std::vector<std::size_t>> oob;   // per tree, sorted row indices
    int mtry = 0;
    std::uint64_t seed = 0;

    int predict(const double* x) const {
        std::array<int, kNumClasses> votes{};
        for (const auto& t : trees) ++votes[static_cast<std::size_t>(t.predict(x))];
        int lab = 0;
        for (int c = 1; c < kNumClasses; ++c)
            if (votes[c] > votes[lab]) lab = c;
        return lab;
    }
};

inline RandomForest fit_forest(const LabeledMatrix& data, int n_trees,
                               int features_per_node, std::uint64_t seed) {
    RandomForest rf;
    rf.seed = seed;
    rf.mtry = features_per_node > 0
                  ? features_per_node
                  : static_cast<int>(std::ceil(
                        std::sqrt(static_cast<double>(data.n_features))));
    const std::size_t n = data.n_rows();
    for (int t = 0; t < n_trees; ++t) {
        std::mt19937_64 rng(detail::mix_seed(seed, static_cast<std::uint64_t>(t)));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<std::size_t> bag(n);
        std::vector<std::uint8_t> in_bag(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            bag[i] = pick(rng);
            in_bag[bag[i]] = 1;
        }
        rf.trees.push_back(grow_tree(data, bag,
                                     std::numeric_limits<std::size_t>::max(),
                                     rf.mtry, &rng));
        std::vector<std::size_t> oob_rows;
        for (std::size_t i = 0; i < n; ++i)
            if (!in_bag[i]) oob_rows.push_back(i);
        rf.oob.push_back(std::move(oob_rows));
    }
    return rf;
}

/// Permutation importance on the recorded OOB sets: per feature, the rise
/// in per-tree OOB error after permuting that feature, averaged over trees
/// and divided by its standard deviation over trees (0 when that deviation
/// vanishes).
inline std::vector<double> oob_permutation_importance(
    const RandomForest& rf, const LabeledMatrix& data) {
    const std::size_t F = data.n_features;
    const std::size_t T = rf.trees.size();
    std::vector<double> baseline(T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        const auto& rows = rf.oob[t];
        if (rows.empty()) continue;
        std::size_t wrong = 0;
        for (auto i : rows)
            wrong += rf.trees[t].predict(data.row(i)) != data.y[i];
        baseline[t] = static_cast<double>(wrong) /
                      static_cast<double>(rows.size());
    }

    std::vector<double> importance(F, 0.0);
    std::vector<double> buf;
    std::vector<double> delta(T);
    for (std::size_t f = 0; f < F; ++f) {
        std::size_t used = 0;
        double sum = 0;
        for (std::size_t t = 0; t < T; ++t) {
            const auto& rows = rf.oob[t];
            if (rows.empty()) {
                delta[t] = 0;
                continue;
            }
            buf.resize(rows.size());
            for (std::size_t k = 0; k < rows.size(); ++k)
                buf[k] = data.row(rows[k])[f];
            std::mt19937_64 rng(detail::mix_seed(
                detail::mix_seed(rf.seed, static_cast<std::uint64_t>(t)),
                static_cast<std::uint64_t>(f) + 0x51ED270B9ULL));
            std::shuffle(buf.begin(), buf.end(), rng);
            std::size_t wrong = 0;
            std::vector<double> probe(data.n_features);
            for (std::size_t k = 0; k < rows.size(); ++k) {
                const double* r = data.row(rows[k]);
                std::copy(r, r + data.n_features, probe.begin());
                probe[f] = buf[k];
                wrong += rf.trees[t].predict(probe.data()) != data.y[rows[k]];
            }
            delta[t] = static_cast<double>(wrong) /
                           static_cast<double>(rows.size()) -
                       baseline[t];
            sum += delta[t];
            ++used;
        }
        if (used == 0) continue;
        const double mean = sum / static_cast<double>(used);
        double var = 0;
        for (std::size_t t = 0; t < T; ++t)
            if (!rf.oob[t].empty()) var += (delta[t] - mean) * (delta[t] - mean);
        const double sd = used > 1 ? std::sqrt(var / static_cast<double>(used - 1))
                                   : 0.0;
        importance[f] = sd < 1e-12 ? 0.0 : mean / sd;
    }
    return importance;
}

} // namespace radsurv
