#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

#include "impedscope/matrix.hpp"
#include "impedscope/models/common.hpp"
#include "impedscope/rng.hpp"

namespace impedscope {

namespace detail {

/// CART-style tree with Gini splits. Node arrays instead of pointers keep
/// serialization trivial. Split-gain ties break toward the lowest feature
/// index, then the lowest threshold, so trees are reproducible.
struct Tree {
    struct Node {
        int feature = -1;       // -1 marks a leaf
        double threshold = 0.0;
        int left = -1, right = -1;
        int leaf_class = 0;
    };
    std::vector<Node> nodes;

    int predict(const double* row) const {
        int idx = 0;
        while (nodes[size_t(idx)].feature >= 0) {
            const Node& nd = nodes[size_t(idx)];
            idx = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
        }
        return nodes[size_t(idx)].leaf_class;
    }
};

inline double gini(const std::vector<size_t>& counts, size_t total) {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (const size_t c : counts) {
        const double p = double(c) / double(total);
        g -= p * p;
    }
    return g;
}

struct TreeBuilder {
    const Matrix& x;
    const std::vector<int>& y;
    size_t k;
    int max_depth;
    size_t m_features;
    Rng& rng;
    Tree tree;

    int build(std::vector<size_t>& rows, int depth) {
        std::vector<size_t> counts(k, 0);
        for (const size_t r : rows) counts[size_t(y[r])]++;
        int majority = 0;
        for (size_t c = 1; c < k; ++c)
            if (counts[c] > counts[size_t(majority)]) majority = int(c);

        const bool pure = counts[size_t(majority)] == rows.size();
        const bool depth_capped = max_depth > 0 && depth >= max_depth;
        if (pure || depth_capped || rows.size() < 2) return make_leaf(majority);

        // sample m features without replacement, examined in ascending order
        std::vector<size_t> feats(x.cols());
        std::iota(feats.begin(), feats.end(), 0);
        for (size_t i = 0; i < m_features; ++i) {
            const size_t j = i + size_t(rng.below(feats.size() - i));
            std::swap(feats[i], feats[j]);
        }
        feats.resize(m_features);
        std::sort(feats.begin(), feats.end());

        const double parent = gini(counts, rows.size());
        double best_gain = 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;

        std::vector<std::pair<double, size_t>> vals(rows.size());
        for (const size_t f : feats) {
            for (size_t i = 0; i < rows.size(); ++i) vals[i] = {x(rows[i], f), rows[i]};
            std::sort(vals.begin(), vals.end());
            std::vector<size_t> left(k, 0), right = counts;
            size_t n_left = 0;
            for (size_t i = 0; i + 1 < vals.size(); ++i) {
                const size_t cls = size_t(y[vals[i].second]);
                left[cls]++;
                right[cls]--;
                ++n_left;
                if (vals[i].first == vals[i + 1].first) continue;
                const size_t n_right = rows.size() - n_left;
                const double child = (double(n_left) * gini(left, n_left) +
                                      double(n_right) * gini(right, n_right)) /
                                     double(rows.size());
                const double gain = parent - child;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = int(f);
                    best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                }
            }
        }
        if (best_feature < 0) return make_leaf(majority);

        std::vector<size_t> lrows, rrows;
        for (const size_t r : rows)
            (x(r, size_t(best_feature)) <= best_threshold ? lrows : rrows).push_back(r);
        if (lrows.empty() || rrows.empty()) return make_leaf(majority);

        const int idx = int(tree.nodes.size());
        tree.nodes.push_back({best_feature, best_threshold, -1, -1, majority});
        rows.clear();
        rows.shrink_to_fit();
        const int l = build(lrows, depth + 1);
        const int r = build(rrows, depth + 1);
        tree.nodes[size_t(idx)].left = l;
        tree.nodes[size_t(idx)].right = r;
        return idx;
    }

    int make_leaf(int cls) {
        tree.nodes.push_back({-1, 0.0, -1, -1, cls});
        return int(tree.nodes.size()) - 1;
    }
};

} // namespace detail

/// Random forest: with-replacement bootstrap per tree, Gini impurity splits,
/// a per-split feature subsample of max_features_fraction columns. Class
/// probability is the fraction of trees voting for the class, so the vote
/// count oracle reproduces predict_proba exactly.
class ForestModel final : public TrainedModel {
public:
    ModelKind kind() const override { return ModelKind::RF; }
    size_t n_classes() const override { return k_; }
    size_t n_features() const override { return d_; }

    Matrix predict_proba(const Matrix& x) const override {
        require(x.cols() == d_, "feature count differs from training");
        Matrix p(x.rows(), k_);
        for (size_t i = 0; i < x.rows(); ++i) {
            for (const auto& t : trees_) p(i, size_t(t.predict(x.row_ptr(i))))++;
            for (size_t c = 0; c < k_; ++c) p(i, c) /= double(trees_.size());
        }
        return p;
    }

    std::vector<int> tree_votes(const double* row) const {
        std::vector<int> votes;
        votes.reserve(trees_.size());
        for (const auto& t : trees_) votes.push_back(t.predict(row));
        return votes;
    }

    void save(std::ostream& out) const override {
        detail::write_model_header(out, ModelKind::RF);
        detail::write_u64(out, k_);
        detail::write_u64(out, d_);
        detail::write_u64(out, trees_.size());
        for (const auto& t : trees_) {
            detail::write_u64(out, t.nodes.size());
            for (const auto& nd : t.nodes) {
                detail::write_u32(out, uint32_t(nd.feature));
                detail::write_f64(out, nd.threshold);
                detail::write_u32(out, uint32_t(nd.left));
                detail::write_u32(out, uint32_t(nd.right));
                detail::write_u32(out, uint32_t(nd.leaf_class));
            }
        }
    }

    static std::unique_ptr<ForestModel> load_body(std::istream& in) {
        auto m = std::make_unique<ForestModel>();
        m->k_ = detail::read_u64(in);
        m->d_ = detail::read_u64(in);
        const size_t nt = detail::read_u64(in);
        m->trees_.resize(nt);
        for (auto& t : m->trees_) {
            t.nodes.resize(detail::read_u64(in));
            for (auto& nd : t.nodes) {
                nd.feature = int(detail::read_u32(in));
                nd.threshold = detail::read_f64(in);
                nd.left = int(detail::read_u32(in));
                nd.right = int(detail::read_u32(in));
                nd.leaf_class = int(detail::read_u32(in));
            }
        }
        return m;
    }

    friend std::unique_ptr<ForestModel> fit_forest(const Matrix&, const std::vector<int>&,
                                                   const HyperParams&, uint64_t);

private:
    size_t k_ = 0, d_ = 0;
    std::vector<detail::Tree> trees_;
};

inline std::unique_ptr<ForestModel> fit_forest(const Matrix& x, const std::vector<int>& y,
                                               const HyperParams& hp, uint64_t seed) {
    detail::check_training_inputs(x, y);
    auto model = std::make_unique<ForestModel>();
    model->k_ = size_t(detail::class_count(y));
    model->d_ = x.cols();
    const size_t m_features =
        std::max<size_t>(1, size_t(std::floor(hp.max_features_fraction * double(x.cols()))));

    model->trees_.resize(size_t(hp.n_trees));
    for (size_t t = 0; t < size_t(hp.n_trees); ++t) {
        Rng rng(substream(seed, "tree", t));
        std::vector<size_t> rows(x.rows());
        for (size_t i = 0; i < x.rows(); ++i) rows[i] = size_t(rng.below(x.rows()));
        std::sort(rows.begin(), rows.end());
        detail::TreeBuilder builder{x, y, model->k_, hp.max_depth, m_features, rng, {}};
        builder.build(rows, 0);
        model->trees_[t] = std::move(builder.tree);
    }
    return model;
}

} // namespace impedscope
