#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drivepred/classifiers.hpp"
#include "generators.hpp"

using namespace drivepred;
using namespace drivepred::classifiers;
using domain::Algorithm;

namespace {

// Three well-separated Gaussian blobs, 50 points each.
struct Toy {
    Matrix x;
    std::vector<Label> y;
};

Toy blobs(std::uint64_t seed, std::size_t per_class = 50) {
    gen::Source g(seed);
    const double centers[3][2] = {{-5, -5}, {0, 5}, {5, -5}};
    Toy t{Matrix(3 * per_class, 2), {}};
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < per_class; ++i) {
            const std::size_t r = c * per_class + i;
            t.x(r, 0) = centers[c][0] + g.real(-1.0, 1.0);
            t.x(r, 1) = centers[c][1] + g.real(-1.0, 1.0);
            t.y.push_back(static_cast<Label>(c) + 3);
        }
    }
    return t;
}

double train_accuracy(const TrainedClassifier& m, const Toy& t) {
    const auto p = m.predict(t.x);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < p.size(); ++i) ok += p[i] == t.y[i];
    return static_cast<double>(ok) / static_cast<double>(p.size());
}

bool non_increasing(const std::vector<double>& v, double slack = 1e-12) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[i - 1] + slack) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("every family separates three distant blobs") {
    const auto t = blobs(1);
    for (auto a : domain::all_algorithms()) {
        CAPTURE(domain::to_string(a));
        const auto m = fit(TrainingConfig(a, 3), t.x, t.y);
        CHECK(m.classes() == std::vector<Label>{3, 4, 5});
        CHECK(train_accuracy(m, t) >= (a == Algorithm::AdaBoost ? 0.66 : 0.99));
    }
}

TEST_CASE("trees reach 100% on separable data") {
    const auto t = blobs(2);
    CHECK(train_accuracy(fit(TrainingConfig(Algorithm::DecisionTree, 0), t.x, t.y), t) == 1.0);
    CHECK(train_accuracy(fit(TrainingConfig(Algorithm::RandomForest, 0), t.x, t.y), t) == 1.0);
}

TEST_CASE("a one-tree forest without bootstrap or feature sampling is a decision tree") {
    gen::Source g(5);
    const auto x = g.matrix(120, 4);
    const auto y = g.labels(120, 3);
    const auto dt = fit(TrainingConfig(Algorithm::DecisionTree, 1), x, y);
    const auto rf = fit(TrainingConfig(Algorithm::RandomForest, 1, {{"n_estimators", 1}, {"bootstrap", 0}, {"max_features", 4}}),
                        x, y);
    CHECK(std::get<ForestState>(rf.state()).trees.front() == std::get<TreeState>(dt.state()).tree);
    CHECK(rf.predict(x) == dt.predict(x));
}

TEST_CASE("forest probabilities are vote fractions of its trees") {
    gen::Source g(6);
    const auto x = g.matrix(80, 3);
    const auto y = g.labels(80, 3);
    const auto rf = fit(TrainingConfig(Algorithm::RandomForest, 2, {{"n_estimators", 15}}), x, y);
    const auto& trees = std::get<ForestState>(rf.state()).trees;
    const auto proba = rf.predict_proba(x);
    const auto pred = rf.predict(x);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        std::vector<double> votes(3, 0.0);
        for (const auto& t : trees) votes[t.predict_class(x.row(i))] += 1.0;
        for (std::size_t c = 0; c < 3; ++c) CHECK(proba(i, c) == doctest::Approx(votes[c] / 15.0));
        const auto best = static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
        CHECK(pred[i] == rf.classes()[best]);
    }
}

TEST_CASE("trees are invariant to power-of-two feature scaling") {
    gen::Source g(7);
    auto x = g.matrix(100, 3);
    const auto y = g.labels(100, 4);
    Matrix scaled = x;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        scaled(i, 0) *= 4.0;
        scaled(i, 2) *= 0.125;
    }
    for (auto a : {Algorithm::DecisionTree, Algorithm::RandomForest}) {
        CHECK(fit(TrainingConfig(a, 9), x, y).predict(x) == fit(TrainingConfig(a, 9), scaled, y).predict(scaled));
    }
}

TEST_CASE("GaussianNB gives 0.5/0.5 at the midpoint of a symmetric problem") {
    const auto x = Matrix::from_rows({{-2}, {-1}, {1}, {2}});
    const auto m = fit(TrainingConfig(Algorithm::GaussianNB, 0), x, {0, 0, 1, 1});
    const auto p = m.predict_proba(Matrix::from_rows({{0}}));
    CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("GaussianNB posteriors match the closed form") {
    gen::Source g(8);
    const auto x = g.matrix(60, 3);
    const auto y = g.labels(60, 3);
    const auto m = fit(TrainingConfig(Algorithm::GaussianNB, 0), x, y);
    const auto q = g.matrix(20, 3);
    const auto proba = m.predict_proba(q);

    double max_var = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
        const auto col = x.column(j);
        const double mu = std::accumulate(col.begin(), col.end(), 0.0) / 60.0;
        double v = 0.0;
        for (double c : col) v += (c - mu) * (c - mu);
        max_var = std::max(max_var, v / 60.0);
    }
    for (std::size_t r = 0; r < q.rows(); ++r) {
        std::vector<double> logp(3);
        for (int c = 0; c < 3; ++c) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < 60; ++i) {
                if (y[i] == c) idx.push_back(i);
            }
            double lp = std::log(static_cast<double>(idx.size()) / 60.0);
            for (std::size_t j = 0; j < 3; ++j) {
                double mu = 0.0;
                for (auto i : idx) mu += x(i, j);
                mu /= static_cast<double>(idx.size());
                double var = 0.0;
                for (auto i : idx) var += (x(i, j) - mu) * (x(i, j) - mu);
                var = var / static_cast<double>(idx.size()) + 1e-9 * max_var;
                const double d = q(r, j) - mu;
                lp += -0.5 * std::log(2.0 * M_PI * var) - d * d / (2.0 * var);
            }
            logp[static_cast<std::size_t>(c)] = lp;
        }
        const double top = *std::max_element(logp.begin(), logp.end());
        double z = 0.0;
        for (double v : logp) z += std::exp(v - top);
        for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(proba(r, c) - std::exp(logp[c] - top) / z) < 1e-9);
    }
}

TEST_CASE("GaussianNB survives all-constant features") {
    const auto x = Matrix::from_rows({{1, 1}, {1, 1}, {1, 1}});
    const auto m = fit(TrainingConfig(Algorithm::GaussianNB, 0), x, {0, 1, 1});
    CHECK(m.predict(x) == std::vector<Label>{1, 1, 1});
}

TEST_CASE("1-NN reproduces its training labels") {
    gen::Source g(10);
    const auto x = g.matrix(50, 3);
    const auto y = g.labels(50, 5);
    CHECK(fit(TrainingConfig(Algorithm::KNNeighbors, 0, {{"k", 1}}), x, y).predict(x) == y);
}

TEST_CASE("KNN majority vote and fractions") {
    const auto x = Matrix::from_rows({{0}, {1}, {2}, {10}, {11}});
    const std::vector<Label> y{2, 2, 7, 7, 9};
    const auto k3 = fit(TrainingConfig(Algorithm::KNNeighbors, 0, {{"k", 3}}), x, y);
    CHECK(k3.predict(Matrix::from_rows({{0.5}})) == std::vector<Label>{2});

    const auto x5 = Matrix::from_rows({{0}, {1}, {2}, {3}, {4}});
    const auto k5 = fit(TrainingConfig(Algorithm::KNNeighbors, 0), x5, {1, 1, 1, 0, 0});
    const auto p = k5.predict_proba(Matrix::from_rows({{2}}));
    CHECK(p(0, 0) == doctest::Approx(0.4));
    CHECK(p(0, 1) == doctest::Approx(0.6));
}

TEST_CASE("KNN vote ties go to the nearer class, then the lower label") {
    const auto x = Matrix::from_rows({{0}, {10}, {4}, {6}});
    const auto m = fit(TrainingConfig(Algorithm::KNNeighbors, 0, {{"k", 4}}), x, {0, 0, 1, 1});
    CHECK(m.predict(Matrix::from_rows({{5}})) == std::vector<Label>{1});
    CHECK(m.predict(Matrix::from_rows({{-1}})) == std::vector<Label>{0});
}

TEST_CASE("logistic regression with zero weights is uniform") {
    const auto x = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
    const std::vector<int> y{0, 1, 2};
    const double loss = logistic::objective(x, y, Matrix(3, 2), std::vector<double>(3, 0.0), 1.0);
    CHECK(loss == doctest::Approx(std::log(3.0)));
    const auto m = fit(TrainingConfig(Algorithm::LogisticRegression, 0, {{"max_epochs", 0}}), x, {0, 1, 2});
    const auto p = m.predict_proba(x);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t c = 0; c < 3; ++c) CHECK(p(i, c) == doctest::Approx(1.0 / 3.0));
    }
}

TEST_CASE("logistic gradient matches central finite differences") {
    gen::Source g(12);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = g.size(5, 30);
        const std::size_t f = g.size(1, 4);
        const std::size_t k = g.size(2, 4);
        Matrix x(n, f);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < f; ++j) x(i, j) = g.real(-2.0, 2.0);
        }
        const auto y = g.labels(n, static_cast<int>(k));
        Matrix w(k, f);
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t j = 0; j < f; ++j) w(c, j) = g.real(-1.0, 1.0);
        }
        std::vector<double> b(k);
        for (double& v : b) v = g.real(-1.0, 1.0);
        const double l2 = g.real(0.0, 2.0);
        Matrix gw;
        std::vector<double> gb;
        logistic::objective(x, y, w, b, l2, &gw, &gb);
        const double h = 1e-6;
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t j = 0; j < f; ++j) {
                Matrix wp = w, wm = w;
                wp(c, j) += h;
                wm(c, j) -= h;
                const double fd = (logistic::objective(x, y, wp, b, l2) - logistic::objective(x, y, wm, b, l2)) / (2 * h);
                CHECK(std::abs(fd - gw(c, j)) < 1e-5);
            }
            auto bp = b, bm = b;
            bp[c] += h;
            bm[c] -= h;
            const double fd = (logistic::objective(x, y, w, bp, l2) - logistic::objective(x, y, w, bm, l2)) / (2 * h);
            CHECK(std::abs(fd - gb[c]) < 1e-5);
        }
    }
}

TEST_CASE("iterative objectives never increase") {
    gen::Source g(14);
    const auto t = blobs(3, 30);
    const auto x = g.matrix(90, 3);
    const auto y = g.labels(90, 3);
    for (auto a : {Algorithm::LogisticRegression, Algorithm::LinearSVM, Algorithm::GradientBoosting}) {
        CAPTURE(domain::to_string(a));
        for (const Matrix* data : {&t.x, &x}) {
            const auto& labels = data == &t.x ? t.y : y;
            Matrix z = *data;
            // Standardize so the fixed learning rate is stable.
            for (std::size_t j = 0; j < z.cols(); ++j) {
                const auto col = z.column(j);
                const double mu = std::accumulate(col.begin(), col.end(), 0.0) / col.size();
                double v = 0.0;
                for (double c : col) v += (c - mu) * (c - mu);
                const double s = std::sqrt(v / col.size());
                for (std::size_t i = 0; i < z.rows(); ++i) z(i, j) = (z(i, j) - mu) / s;
            }
            const auto m = fit(TrainingConfig(a, 0, a == Algorithm::LinearSVM ? Hyperparameters{{"epochs", 200}}
                                                                                 : Hyperparameters{}),
                               z, labels);
            CHECK(m.loss_trace().size() > 1);
            CHECK(non_increasing(m.loss_trace()));
            CHECK(m.loss_trace().back() < m.loss_trace().front());
        }
    }
}

TEST_CASE("SAMME alpha and weight normalization") {
    CHECK(adaboost::samme_alpha(0.25, 2) == doctest::Approx(std::log(3.0)));
    CHECK(adaboost::samme_alpha(0.5, 3) == doctest::Approx(std::log(2.0)));
    CHECK(adaboost::samme_alpha(0.0, 2) == doctest::Approx(std::log(1e12)));

    gen::Source g(15);
    const auto x = g.matrix(100, 3);
    const auto y = g.labels(100, 3);
    const tree::SortedColumns sorted(x);
    std::vector<double> w(100, 0.01);
    Rng rng(1);
    for (int round = 0; round < 10; ++round) {
        const auto r = adaboost::fit_round(x, sorted, y, 3, w, 1, rng);
        if (!r.accepted) break;
        CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) < 1e-12);
        for (double v : w) CHECK(v > 0.0);
    }
}

TEST_CASE("a perfect stump stops boosting with a capped alpha") {
    const auto x = Matrix::from_rows({{1}, {2}, {3}, {4}});
    const auto m = fit(TrainingConfig(Algorithm::AdaBoost, 0), x, {0, 0, 1, 1});
    const auto& s = std::get<AdaBoostState>(m.state());
    REQUIRE(s.stumps.size() == 1u);
    CHECK(s.alphas[0] == doctest::Approx(std::log(1e12)));
    CHECK(m.predict(x) == std::vector<Label>{0, 0, 1, 1});
    CHECK_FALSE(m.diagnostics().empty());
}

TEST_CASE("gradient boosting stages reduce the log-loss") {
    gen::Source g(16);
    const auto x = g.matrix(100, 3);
    const auto y = g.labels(100, 3);
    const tree::SortedColumns sorted(x);
    Matrix raw(100, 3, 0.0);
    Rng rng(0);
    double prev = gboost::log_loss(raw, y);
    CHECK(prev == doctest::Approx(std::log(3.0)));
    for (int stage = 0; stage < 5; ++stage) {
        gboost::fit_stage(x, sorted, y, 3, raw, 0.1, 3, rng);
        const double now = gboost::log_loss(raw, y);
        CHECK(now < prev);
        prev = now;
    }
}

TEST_CASE("discriminative families reject single-class data; the rest predict that class") {
    const auto x = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
    const std::vector<Label> y{4, 4, 4};
    for (auto a : domain::all_algorithms()) {
        CAPTURE(domain::to_string(a));
        const bool discriminative = a == Algorithm::LogisticRegression || a == Algorithm::LinearSVM ||
                                    a == Algorithm::AdaBoost || a == Algorithm::GradientBoosting;
        if (discriminative) {
            try {
                fit(TrainingConfig(a, 0), x, y);
                FAIL("expected FitError");
            } catch (const FitError& e) {
                CHECK(std::string(e.what()).find("needs at least two distinct labels") != std::string::npos);
            }
        } else {
            CHECK(fit(TrainingConfig(a, 0), x, y).predict(x) == y);
        }
    }
}

TEST_CASE("serialization round-trips every family") {
    const auto t = blobs(4, 20);
    for (auto a : domain::all_algorithms()) {
        CAPTURE(domain::to_string(a));
        const auto m = fit(TrainingConfig(a, 21, a == Algorithm::RandomForest ? Hyperparameters{{"n_estimators", 10}}
                                                                              : Hyperparameters{}),
                           t.x, t.y);
        const auto back = TrainedClassifier::deserialize(m.serialize());
        CHECK(back.same_model(m));
        CHECK(back.predict(t.x) == m.predict(t.x));
    }
}

TEST_CASE("fits are deterministic in the seed") {
    gen::Source g(18);
    const auto x = g.matrix(150, 4);
    const auto y = g.labels(150, 4);
    for (auto a : domain::all_algorithms()) {
        CAPTURE(domain::to_string(a));
        CHECK(fit(TrainingConfig(a, 5), x, y).serialize() == fit(TrainingConfig(a, 5), x, y).serialize());
    }
    CHECK_FALSE(fit(TrainingConfig(Algorithm::RandomForest, 5), x, y).same_model(
        fit(TrainingConfig(Algorithm::RandomForest, 6), x, y)));
}

TEST_CASE("LinearSVM has no probabilities") {
    const auto t = blobs(5, 10);
    const auto m = fit(TrainingConfig(Algorithm::LinearSVM, 0), t.x, t.y);
    CHECK_FALSE(m.supports_proba());
    CHECK_THROWS_AS(m.predict_proba(t.x), CapabilityError);
}

TEST_CASE("probabilities are rows summing to one") {
    const auto t = blobs(6, 20);
    for (auto a : domain::all_algorithms()) {
        if (a == Algorithm::LinearSVM) continue;
        CAPTURE(domain::to_string(a));
        const auto p = fit(TrainingConfig(a, 0), t.x, t.y).predict_proba(t.x);
        for (std::size_t i = 0; i < p.rows(); ++i) {
            const auto row = p.row(i);
            CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("configuration errors") {
    CHECK_THROWS_AS(TrainingConfig(Algorithm::KNNeighbors, 0, {{"depth", 3}}), UsageError);
    CHECK_THROWS_AS(fit(TrainingConfig(Algorithm::KNNeighbors, 0, {{"k", 0}}), Matrix(2, 1), {0, 1}), UsageError);
    CHECK_THROWS_AS(fit(TrainingConfig(Algorithm::DecisionTree, 0, {{"max_depth", 1.5}}), Matrix(2, 1), {0, 1}),
                    UsageError);
    CHECK_THROWS_AS(fit(TrainingConfig(Algorithm::DecisionTree, 0), Matrix(0, 1), {}), DataError);
    const auto m = fit(TrainingConfig(Algorithm::DecisionTree, 0), Matrix::from_rows({{1}, {2}}), {0, 1});
    CHECK_THROWS_AS(m.predict(Matrix(1, 2)), DataError);
}

TEST_CASE("default hyperparameters") {
    CHECK(default_hyperparameters(Algorithm::RandomForest).at("n_estimators") == 100);
    CHECK(default_hyperparameters(Algorithm::KNNeighbors).at("k") == 5);
    CHECK(default_hyperparameters(Algorithm::GaussianNB).at("var_smoothing") == 1e-9);
    CHECK(default_hyperparameters(Algorithm::AdaBoost).at("n_estimators") == 50);
    CHECK(default_hyperparameters(Algorithm::GradientBoosting).at("max_depth") == 3);
}
