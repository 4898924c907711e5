#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "drivepred/tree.hpp"
#include "generators.hpp"

using namespace drivepred;
using namespace drivepred::tree;

namespace {

double oracle_gini(const std::vector<int>& classes, std::size_t k) {
    std::vector<double> counts(k, 0.0);
    for (int c : classes) counts[static_cast<std::size_t>(c)] += 1.0;
    double sum = 0.0;
    for (double c : counts) sum += (c / classes.size()) * (c / classes.size());
    return 1.0 - sum;
}

double split_gini(const Matrix& x, const std::vector<int>& y, std::size_t k, std::size_t f, double thr) {
    std::vector<int> l, r;
    for (std::size_t i = 0; i < x.rows(); ++i) (x(i, f) <= thr ? l : r).push_back(y[i]);
    if (l.empty() || r.empty()) return 2.0;
    const double n = static_cast<double>(y.size());
    return (l.size() * oracle_gini(l, k) + r.size() * oracle_gini(r, k)) / n;
}

struct Best {
    double gini = 2.0;
    bool any = false;
};

// Exhaustive search over every feature and every midpoint between distinct values.
Best brute_force(const Matrix& x, const std::vector<int>& y, std::size_t k) {
    Best b;
    for (std::size_t f = 0; f < x.cols(); ++f) {
        auto v = x.column(f);
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            const double g = split_gini(x, y, k, f, (v[i] + v[i + 1]) / 2.0);
            b.any = true;
            b.gini = std::min(b.gini, g);
        }
    }
    return b;
}

Tree grow(const Matrix& x, const std::vector<int>& y, std::size_t k, TreeParams p = {}) {
    SortedColumns sorted(x);
    std::vector<double> w(x.rows(), 1.0);
    Rng rng(0);
    return grow_classification_tree(x, sorted, y, k, w, p, rng);
}

}  // namespace

TEST_CASE("gini impurity examples") {
    CHECK(gini_impurity(std::vector<double>{10, 0, 0}) == 0.0);
    CHECK(gini_impurity(std::vector<double>{5, 5}) == doctest::Approx(0.5));
    CHECK(gini_impurity(std::vector<double>{1, 1, 1, 1}) == doctest::Approx(0.75));
    CHECK_THROWS_AS(gini_impurity(std::vector<double>{0, 0}), DataError);
}

TEST_CASE("x = [1,2,3,4] with labels [0,0,1,1] splits at 2.5 with zero impurity") {
    const auto x = Matrix::from_rows({{1}, {2}, {3}, {4}});
    const auto s = find_best_split(x, std::vector<int>{0, 0, 1, 1}, 2);
    REQUIRE(s.has_value());
    CHECK(s->feature == 0u);
    CHECK(s->threshold == 2.5);
    CHECK(s->weighted_gini == 0.0);
}

TEST_CASE("equally good features resolve to the lower index") {
    const auto x = Matrix::from_rows({{1, 1}, {2, 2}, {3, 3}, {4, 4}});
    const auto s = find_best_split(x, std::vector<int>{0, 0, 1, 1}, 2);
    REQUIRE(s.has_value());
    CHECK(s->feature == 0u);
}

TEST_CASE("pure nodes and constant features do not split") {
    CHECK_FALSE(find_best_split(Matrix::from_rows({{1}, {2}}), std::vector<int>{1, 1}, 2).has_value());
    CHECK_FALSE(find_best_split(Matrix::from_rows({{3}, {3}}), std::vector<int>{0, 1}, 2).has_value());
}

TEST_CASE("property: the chosen split is as good as any exhaustive candidate") {
    gen::Source g(13);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = g.size(2, 40);
        const std::size_t f = g.size(1, 4);
        const int k = g.integer(2, 4);
        Matrix x(n, f);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < f; ++j) x(i, j) = g.integer(0, 6);
        }
        const auto y = g.labels(n, k);
        const auto s = find_best_split(x, y, static_cast<std::size_t>(k));
        const auto oracle = brute_force(x, y, static_cast<std::size_t>(k));
        const bool pure = std::all_of(y.begin(), y.end(), [&](int c) { return c == y[0]; });
        if (pure || !oracle.any) {
            CHECK_FALSE(s.has_value());
            continue;
        }
        REQUIRE(s.has_value());
        CHECK(std::abs(s->weighted_gini - oracle.gini) < 1e-12);
        CHECK(std::abs(split_gini(x, y, static_cast<std::size_t>(k), s->feature, s->threshold) - oracle.gini) < 1e-12);
    }
}

TEST_CASE("an unlimited tree fits distinct points perfectly") {
    gen::Source g(2);
    const auto x = g.matrix(60, 3);
    const auto y = g.labels(60, 4);
    const auto t = grow(x, y, 4);
    for (std::size_t i = 0; i < x.rows(); ++i) CHECK(static_cast<int>(t.predict_class(x.row(i))) == y[i]);
}

TEST_CASE("max_depth and min_samples_split bound growth") {
    gen::Source g(4);
    const auto x = g.matrix(200, 4);
    const auto y = g.labels(200, 3);
    TreeParams p;
    p.max_depth = 3;
    CHECK(grow(x, y, 3, p).depth() <= 3u);
    TreeParams q;
    q.min_samples_split = 1000;
    const auto stump = grow(x, y, 3, q);
    CHECK(stump.nodes().size() == 1u);
    CHECK(stump.leaf_count() == 1u);
}

TEST_CASE("leaf values are normalized class distributions") {
    const auto x = Matrix::from_rows({{1}, {1}, {1}, {2}});
    const auto t = grow(x, {0, 0, 1, 1}, 2);
    const auto v = t.predict(std::vector<double>{1.0});
    CHECK(v[0] == doctest::Approx(2.0 / 3.0));
    CHECK(v[1] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("rows with zero weight are ignored") {
    const auto x = Matrix::from_rows({{1}, {2}, {3}});
    SortedColumns sorted(x);
    Rng rng(0);
    const std::vector<double> w{1, 0, 1};
    const auto t = grow_classification_tree(x, sorted, std::vector<int>{0, 1, 1}, 2, w, {}, rng);
    CHECK(t.predict_class(std::vector<double>{2.0}) == 0u);
}

TEST_CASE("a regression tree predicts the mean of its leaf") {
    const auto x = Matrix::from_rows({{1}, {2}, {10}, {11}});
    SortedColumns sorted(x);
    Rng rng(0);
    const std::vector<double> w(4, 1.0);
    TreeParams p;
    p.max_depth = 1;
    const auto t = grow_regression_tree(x, sorted, std::vector<double>{1, 3, 10, 14}, w, p, rng);
    CHECK(t.predict(std::vector<double>{0.0})[0] == doctest::Approx(2.0));
    CHECK(t.predict(std::vector<double>{20.0})[0] == doctest::Approx(12.0));
}

TEST_CASE("bootstrap of one element is [0]") { CHECK(bootstrap_sample(1, 5) == std::vector<std::size_t>{0}); }

TEST_CASE("bootstrap samples cover about 63.2% of distinct rows") {
    double sum = 0.0;
    const int seeds = 1000;
    const std::size_t n = 1000;
    for (int s = 0; s < seeds; ++s) {
        const auto b = bootstrap_sample(n, static_cast<std::uint64_t>(s));
        CHECK(b.size() == n);
        sum += static_cast<double>(std::set<std::size_t>(b.begin(), b.end()).size()) / n;
    }
    CHECK(std::abs(sum / seeds - 0.632) < 0.01);
}

TEST_CASE("bootstrap is deterministic in the seed") {
    CHECK(bootstrap_sample(50, 9) == bootstrap_sample(50, 9));
    CHECK(bootstrap_sample(50, 9) != bootstrap_sample(50, 10));
}
