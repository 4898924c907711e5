#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "drivepred/common.hpp"

// CART machinery shared by the tree-based classifiers: weighted Gini trees for
// classification and squared-error trees for gradient boosting.

namespace drivepred::tree {

/// 1 - sum_k (count_k / total)^2. Throws DataError when the total is zero.
double gini_impurity(std::span<const double> label_counts);

struct TreeParams {
    std::size_t max_depth = 0;  // 0 = unlimited
    std::size_t min_samples_split = 2;
    std::size_t max_features = 0;  // 0 = all features
};

struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // x[feature] <= threshold goes left
    std::int32_t left = -1;
    std::int32_t right = -1;

    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const Node&, const Node&) = default;
};

/// A fitted tree. Every node carries `value_width` values: the normalized
/// class distribution for classification trees, a single output for
/// regression trees.
class Tree {
public:
    Tree() = default;
    Tree(std::size_t value_width, std::vector<Node> nodes, std::vector<double> values);

    std::size_t value_width() const { return width_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<double>& values() const { return values_; }

    std::size_t leaf_index(std::span<const double> x) const;
    std::span<const double> value(std::size_t node) const { return {values_.data() + node * width_, width_}; }
    std::span<const double> predict(std::span<const double> x) const { return value(leaf_index(x)); }
    /// Index of the largest class weight, lowest index on ties.
    std::size_t predict_class(std::span<const double> x) const;

    std::size_t depth() const;
    std::size_t leaf_count() const;

    friend bool operator==(const Tree&, const Tree&) = default;

private:
    std::size_t width_ = 0;
    std::vector<Node> nodes_;
    std::vector<double> values_;
};

/// Row indices of a matrix sorted by each column (ties by row index). Built
/// once per training matrix and shared by every tree grown on it.
class SortedColumns {
public:
    explicit SortedColumns(const Matrix& x);
    const std::vector<std::uint32_t>& order(std::size_t feature) const { return order_[feature]; }
    std::size_t features() const { return order_.size(); }

private:
    std::vector<std::vector<std::uint32_t>> order_;
};

/// Grows a Gini tree on class indices in [0, n_classes). Rows with zero
/// weight are ignored. rng is drawn from only when max_features restricts
/// the candidate set.
Tree grow_classification_tree(const Matrix& x, const SortedColumns& sorted, std::span<const int> classes,
                              std::size_t n_classes, std::span<const double> weights, const TreeParams& params,
                              Rng& rng);

/// Computes a leaf output from the rows that reached the leaf.
using LeafValueFn = std::function<double(std::span<const std::uint32_t> rows)>;

/// Grows a squared-error regression tree. Leaves default to the weighted
/// mean target; leaf_value overrides that when given.
Tree grow_regression_tree(const Matrix& x, const SortedColumns& sorted, std::span<const double> targets,
                          std::span<const double> weights, const TreeParams& params, Rng& rng,
                          const LeafValueFn& leaf_value = {});

struct SplitChoice {
    std::size_t feature;
    double threshold;
    double weighted_gini;  // support-weighted mean of the two child impurities
};

/// Best single Gini split over all features of an unweighted node; nullopt
/// when the node is pure, too small, or every feature is constant.
std::optional<SplitChoice> find_best_split(const Matrix& x, std::span<const int> classes, std::size_t n_classes);

/// n indices drawn uniformly with replacement from [0, n).
std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed);
std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng);

}  // namespace drivepred::tree
