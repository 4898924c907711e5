#include "drivepred/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace drivepred::tree {

double gini_impurity(std::span<const double> label_counts) {
    double total = 0.0;
    for (double c : label_counts) {
        if (c < 0.0) throw DataError("label counts must be non-negative");
        total += c;
    }
    if (total <= 0.0) throw DataError("gini impurity of an empty node is undefined");
    double sum_sq = 0.0;
    for (double c : label_counts) sum_sq += (c / total) * (c / total);
    return 1.0 - sum_sq;
}

Tree::Tree(std::size_t value_width, std::vector<Node> nodes, std::vector<double> values)
    : width_(value_width), nodes_(std::move(nodes)), values_(std::move(values)) {
    if (values_.size() != nodes_.size() * width_) throw DataError("tree value table does not match node count");
}

std::size_t Tree::leaf_index(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& n = nodes_[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return i;
}

std::size_t Tree::predict_class(std::span<const double> x) const {
    auto v = predict(x);
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::size_t Tree::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t deepest = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        deepest = std::max(deepest, d[i]);
        if (!nodes_[i].is_leaf()) {
            d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
        }
    }
    return deepest;
}

std::size_t Tree::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

SortedColumns::SortedColumns(const Matrix& x) : order_(x.cols()) {
    if (x.rows() > std::numeric_limits<std::uint32_t>::max()) throw DataError("too many rows for a tree");
    for (std::size_t f = 0; f < x.cols(); ++f) {
        auto& o = order_[f];
        o.resize(x.rows());
        std::iota(o.begin(), o.end(), 0U);
        std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
    }
}

namespace {

double midpoint(double a, double b) {
    double t = a / 2.0 + b / 2.0;
    if (!(t > a && t < b)) t = a;
    return t;
}

// Level-wise CART grower. Each level scans every feature's presorted active
// rows once, routing rows to their frontier node, so a level costs
// O(active rows * features) regardless of how many nodes it holds.
class Grower {
public:
    Grower(const Matrix& x, const SortedColumns& sorted, std::span<const int> classes, std::span<const double> targets,
           std::size_t width, std::span<const double> weights, const TreeParams& params, Rng& rng)
        : x_(x), n_(x.rows()), f_(x.cols()), width_(width), classes_(classes), targets_(targets),
          weights_(weights), params_(params), rng_(rng), classification_(!classes.empty()) {
        if (weights_.size() != n_) throw DataError("weight count does not match row count");
        if (sorted.features() != f_) throw DataError("sorted columns do not match the feature matrix");
        if (f_ == 0) throw DataError("a tree needs at least one feature");
        order_.resize(f_);
        for (std::size_t f = 0; f < f_; ++f) {
            const auto& src = sorted.order(f);
            order_[f].reserve(src.size());
            for (auto r : src) {
                if (weights_[r] > 0.0) order_[f].push_back(r);
            }
        }
        if (order_[0].empty()) throw DataError("cannot grow a tree without positively weighted rows");
    }

    Tree run(const LeafValueFn& leaf_value);

private:
    std::int32_t new_node(std::size_t depth) {
        nodes_.push_back(Node{});
        stat_.insert(stat_.end(), width_, 0.0);
        wsum_.push_back(0.0);
        sq_.push_back(0.0);
        yy_.push_back(0.0);
        count_.push_back(0);
        depth_.push_back(depth);
        lo_.insert(lo_.end(), f_, std::numeric_limits<double>::infinity());
        hi_.insert(hi_.end(), f_, -std::numeric_limits<double>::infinity());
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    void add_row(std::size_t node, std::uint32_t row) {
        const double w = weights_[row];
        wsum_[node] += w;
        count_[node] += 1;
        if (classification_) {
            stat_[node * width_ + static_cast<std::size_t>(classes_[row])] += w;
        } else {
            stat_[node * width_] += w * targets_[row];
            yy_[node] += w * targets_[row] * targets_[row];
        }
        auto x = x_.row(row);
        for (std::size_t f = 0; f < f_; ++f) {
            lo_[node * f_ + f] = std::min(lo_[node * f_ + f], x[f]);
            hi_[node * f_ + f] = std::max(hi_[node * f_ + f], x[f]);
        }
    }

    void finish_stats(std::size_t node) {
        if (classification_) {
            double s = 0.0;
            for (std::size_t k = 0; k < width_; ++k) s += stat_[node * width_ + k] * stat_[node * width_ + k];
            sq_[node] = s;
        } else {
            sq_[node] = stat_[node * width_] * stat_[node * width_];
        }
    }

    bool pure(std::size_t node) const {
        if (classification_) {
            std::size_t nonzero = 0;
            for (std::size_t k = 0; k < width_; ++k) nonzero += stat_[node * width_ + k] > 0.0 ? 1 : 0;
            return nonzero <= 1;
        }
        const double sse = yy_[node] - sq_[node] / wsum_[node];
        return sse <= 1e-12 * std::max(1.0, yy_[node]);
    }

    // Candidate features for a node; empty when the node cannot be split.
    std::vector<std::uint8_t> candidates(std::size_t node) {
        std::vector<std::uint8_t> cand(f_, 0);
        auto varies = [&](std::size_t f) { return lo_[node * f_ + f] < hi_[node * f_ + f]; };
        const std::size_t m = params_.max_features;
        if (m == 0 || m >= f_) {
            for (std::size_t f = 0; f < f_; ++f) cand[f] = varies(f) ? 1 : 0;
            return cand;
        }
        // Draw without replacement; constant features do not count toward m.
        std::vector<std::size_t> pool(f_);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        std::size_t found = 0;
        for (std::size_t i = 0; i < f_ && found < m; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng_.below(f_ - i));
            std::swap(pool[i], pool[j]);
            if (varies(pool[i])) {
                cand[pool[i]] = 1;
                ++found;
            }
        }
        return cand;
    }

    const Matrix& x_;
    std::size_t n_;
    std::size_t f_;
    std::size_t width_;
    std::span<const int> classes_;
    std::span<const double> targets_;
    std::span<const double> weights_;
    TreeParams params_;
    Rng& rng_;
    bool classification_;

    std::vector<std::vector<std::uint32_t>> order_;
    std::vector<Node> nodes_;
    std::vector<double> stat_, wsum_, sq_, yy_, lo_, hi_;
    std::vector<std::size_t> count_, depth_;
};

Tree Grower::run(const LeafValueFn& leaf_value) {
    std::vector<std::int32_t> node_of(n_, -1);
    std::vector<std::int32_t> leaf_of(n_, -1);
    new_node(0);
    for (auto r : order_[0]) {
        node_of[r] = 0;
        add_row(0, r);
    }
    finish_stats(0);

    std::vector<std::int32_t> frontier{0};
    std::vector<std::int32_t> slot_of;
    std::vector<double> left;
    while (!frontier.empty()) {
        slot_of.assign(nodes_.size(), -1);
        std::vector<std::int32_t> slots;
        std::vector<std::vector<std::uint8_t>> cand;
        for (auto nd : frontier) {
            const auto node = static_cast<std::size_t>(nd);
            const bool depth_ok = params_.max_depth == 0 || depth_[node] < params_.max_depth;
            if (!depth_ok || count_[node] < std::max<std::size_t>(2, params_.min_samples_split) || pure(node)) continue;
            auto c = candidates(node);
            if (std::none_of(c.begin(), c.end(), [](std::uint8_t v) { return v != 0; })) continue;
            slot_of[node] = static_cast<std::int32_t>(slots.size());
            slots.push_back(nd);
            cand.push_back(std::move(c));
        }

        const std::size_t s_count = slots.size();
        std::vector<double> best_score(s_count, -std::numeric_limits<double>::infinity());
        std::vector<std::int32_t> best_feature(s_count, -1);
        std::vector<double> best_threshold(s_count, 0.0);
        left.assign(s_count * width_, 0.0);
        std::vector<double> w_left(s_count), w_right(s_count), sq_left(s_count), sq_right(s_count), last(s_count);
        std::vector<std::uint8_t> has_last(s_count);

        for (std::size_t f = 0; f < f_ && s_count > 0; ++f) {
            for (std::size_t s = 0; s < s_count; ++s) {
                if (!cand[s][f]) continue;
                const auto node = static_cast<std::size_t>(slots[s]);
                std::fill_n(left.begin() + static_cast<std::ptrdiff_t>(s * width_), width_, 0.0);
                w_left[s] = 0.0;
                w_right[s] = wsum_[node];
                sq_left[s] = 0.0;
                sq_right[s] = sq_[node];
                has_last[s] = 0;
            }
            for (auto r : order_[f]) {
                const auto nd = node_of[r];
                if (nd < 0) continue;
                const auto s_signed = slot_of[static_cast<std::size_t>(nd)];
                if (s_signed < 0) continue;
                const auto s = static_cast<std::size_t>(s_signed);
                if (!cand[s][f]) continue;
                const double v = x_(r, f);
                if (has_last[s] && v > last[s] && w_left[s] > 0.0 && w_right[s] > 0.0) {
                    const double score = sq_left[s] / w_left[s] + sq_right[s] / w_right[s];
                    if (score > best_score[s]) {
                        best_score[s] = score;
                        best_feature[s] = static_cast<std::int32_t>(f);
                        best_threshold[s] = midpoint(last[s], v);
                    }
                }
                const double w = weights_[r];
                const auto node = static_cast<std::size_t>(nd);
                if (classification_) {
                    const auto k = static_cast<std::size_t>(classes_[r]);
                    double& lk = left[s * width_ + k];
                    const double rk = stat_[node * width_ + k] - lk;
                    sq_left[s] += 2.0 * lk * w + w * w;
                    sq_right[s] += -2.0 * rk * w + w * w;
                    lk += w;
                } else {
                    double& ls = left[s * width_];
                    ls += w * targets_[r];
                    const double rs = stat_[node * width_] - ls;
                    sq_left[s] = ls * ls;
                    sq_right[s] = rs * rs;
                }
                w_left[s] += w;
                w_right[s] -= w;
                last[s] = v;
                has_last[s] = 1;
            }
        }

        // Create children in frontier order, then route rows.
        std::vector<std::int32_t> next;
        for (std::size_t s = 0; s < s_count; ++s) {
            if (best_feature[s] < 0) {
                slot_of[static_cast<std::size_t>(slots[s])] = -1;
                continue;
            }
            const auto node = static_cast<std::size_t>(slots[s]);
            const auto l = new_node(depth_[node] + 1);
            const auto r = new_node(depth_[node] + 1);
            nodes_[node].feature = best_feature[s];
            nodes_[node].threshold = best_threshold[s];
            nodes_[node].left = l;
            nodes_[node].right = r;
            next.push_back(l);
            next.push_back(r);
        }
        for (auto r : order_[0]) {
            const auto nd = static_cast<std::size_t>(node_of[r]);
            if (nodes_[nd].is_leaf()) {
                node_of[r] = -1;
                leaf_of[r] = static_cast<std::int32_t>(nd);
                continue;
            }
            const auto& split = nodes_[nd];
            const auto child = x_(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? split.left : split.right;
            node_of[r] = child;
            add_row(static_cast<std::size_t>(child), r);
        }
        for (auto nd : next) finish_stats(static_cast<std::size_t>(nd));
        for (auto& o : order_) {
            std::erase_if(o, [&](std::uint32_t r) { return node_of[r] < 0; });
        }
        frontier = std::move(next);
    }

    std::vector<double> values(nodes_.size() * width_, 0.0);
    for (std::size_t node = 0; node < nodes_.size(); ++node) {
        const double w = wsum_[node];
        for (std::size_t k = 0; k < width_; ++k) values[node * width_ + k] = w > 0.0 ? stat_[node * width_ + k] / w : 0.0;
    }
    if (leaf_value) {
        std::vector<std::vector<std::uint32_t>> rows(nodes_.size());
        for (std::uint32_t r = 0; r < n_; ++r) {
            if (leaf_of[r] >= 0) rows[static_cast<std::size_t>(leaf_of[r])].push_back(r);
        }
        for (std::size_t node = 0; node < nodes_.size(); ++node) {
            if (nodes_[node].is_leaf()) values[node * width_] = leaf_value(rows[node]);
        }
    }
    return Tree(width_, std::move(nodes_), std::move(values));
}

}  // namespace

Tree grow_classification_tree(const Matrix& x, const SortedColumns& sorted, std::span<const int> classes,
                              std::size_t n_classes, std::span<const double> weights, const TreeParams& params,
                              Rng& rng) {
    if (classes.size() != x.rows()) throw DataError("label count does not match row count");
    if (n_classes == 0) throw DataError("at least one class is required");
    for (int c : classes) {
        if (c < 0 || static_cast<std::size_t>(c) >= n_classes) throw DataError("class index out of range");
    }
    Grower g(x, sorted, classes, {}, n_classes, weights, params, rng);
    return g.run({});
}

Tree grow_regression_tree(const Matrix& x, const SortedColumns& sorted, std::span<const double> targets,
                          std::span<const double> weights, const TreeParams& params, Rng& rng,
                          const LeafValueFn& leaf_value) {
    if (targets.size() != x.rows()) throw DataError("target count does not match row count");
    Grower g(x, sorted, {}, targets, 1, weights, params, rng);
    return g.run(leaf_value);
}

std::optional<SplitChoice> find_best_split(const Matrix& x, std::span<const int> classes, std::size_t n_classes) {
    if (x.rows() < 2) return std::nullopt;
    const std::vector<double> weights(x.rows(), 1.0);
    SortedColumns sorted(x);
    Rng unused(0);
    TreeParams params;
    params.max_depth = 1;
    const Tree t = grow_classification_tree(x, sorted, classes, n_classes, weights, params, unused);
    const auto& root = t.nodes().front();
    if (root.is_leaf()) return std::nullopt;

    std::vector<double> lc(n_classes, 0.0), rc(n_classes, 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto& side = x(i, static_cast<std::size_t>(root.feature)) <= root.threshold ? lc : rc;
        side[static_cast<std::size_t>(classes[i])] += 1.0;
    }
    const double nl = std::accumulate(lc.begin(), lc.end(), 0.0);
    const double nr = std::accumulate(rc.begin(), rc.end(), 0.0);
    const double g = (nl * gini_impurity(lc) + nr * gini_impurity(rc)) / (nl + nr);
    return SplitChoice{static_cast<std::size_t>(root.feature), root.threshold, g};
}

std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng) {
    std::vector<std::size_t> out(n);
    for (auto& v : out) v = static_cast<std::size_t>(rng.below(n));
    return out;
}

std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw DataError("bootstrap sample of an empty set");
    Rng rng(seed);
    return bootstrap_sample(n, rng);
}

}  // namespace drivepred::tree
