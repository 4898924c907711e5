#include "drivepred/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "json_util.hpp"

namespace drivepred::classifiers {

namespace {

const std::map<Algorithm, Hyperparameters>& defaults_table() {
    static const std::map<Algorithm, Hyperparameters> table{
        {Algorithm::DecisionTree, {{"max_depth", 0}, {"min_samples_split", 2}}},
        {Algorithm::RandomForest,
         {{"n_estimators", 100}, {"max_features", 0}, {"bootstrap", 1}, {"max_depth", 0}, {"min_samples_split", 2}}},
        {Algorithm::KNNeighbors, {{"k", 5}}},
        {Algorithm::GaussianNB, {{"var_smoothing", 1e-9}}},
        {Algorithm::LogisticRegression, {{"l2", 1.0}, {"learning_rate", 0.1}, {"max_epochs", 1000}, {"tolerance", 1e-6}}},
        {Algorithm::LinearSVM, {{"l2", 1.0}, {"epochs", 1000}}},
        {Algorithm::AdaBoost, {{"n_estimators", 50}, {"max_depth", 1}}},
        {Algorithm::GradientBoosting, {{"n_estimators", 100}, {"max_depth", 3}, {"learning_rate", 0.1}}},
    };
    return table;
}

std::size_t count_param(const TrainingConfig& c, const std::string& name) {
    const double v = c.get(name);
    if (!(v >= 0.0) || v != std::floor(v)) {
        throw UsageError(name + " must be a non-negative integer, got " + std::to_string(v));
    }
    return static_cast<std::size_t>(v);
}

double positive_param(const TrainingConfig& c, const std::string& name) {
    const double v = c.get(name);
    if (!(v > 0.0) || !std::isfinite(v)) throw UsageError(name + " must be positive");
    return v;
}

void softmax_inplace(std::span<double> z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double& v : z) {
        v = std::exp(v - m);
        s += v;
    }
    for (double& v : z) v /= s;
}

// Training data with labels mapped to class indices.
struct Encoded {
    std::vector<Label> classes;
    std::vector<int> y;
};

Encoded encode(const std::vector<Label>& labels) {
    Encoded e;
    std::set<Label> unique(labels.begin(), labels.end());
    e.classes.assign(unique.begin(), unique.end());
    e.y.reserve(labels.size());
    for (Label l : labels) {
        e.y.push_back(static_cast<int>(std::lower_bound(e.classes.begin(), e.classes.end(), l) - e.classes.begin()));
    }
    return e;
}

void require_multiclass(const Encoded& e, Algorithm a) {
    if (e.classes.size() < 2) {
        throw FitError(std::string(domain::to_string(a)) +
                       " needs at least two distinct labels; the training data holds a single class");
    }
}

// ---- trees -----------------------------------------------------------------

ForestState fit_forest(const TrainingConfig& c, const Matrix& x, const Encoded& e) {
    const std::size_t n_trees = count_param(c, "n_estimators");
    if (n_trees == 0) throw UsageError("n_estimators must be at least 1");
    std::size_t max_features = count_param(c, "max_features");
    if (max_features == 0) max_features = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));
    const bool bootstrap = c.get("bootstrap") != 0.0;
    tree::TreeParams params{count_param(c, "max_depth"), count_param(c, "min_samples_split"), max_features};
    const tree::SortedColumns sorted(x);
    const std::size_t n = x.rows();

    ForestState state;
    state.trees.resize(n_trees);
    parallel_for(n_trees, [&](std::size_t t) {
        Rng rng = Rng::substream(c.seed(), t);
        std::vector<double> weights(n, bootstrap ? 0.0 : 1.0);
        if (bootstrap) {
            for (auto i : tree::bootstrap_sample(n, rng)) weights[i] += 1.0;
        }
        state.trees[t] = tree::grow_classification_tree(x, sorted, e.y, e.classes.size(), weights, params, rng);
    });
    return state;
}

// ---- nearest neighbours -----------------------------------------------------

struct Neighbor {
    double dist2;
    std::size_t index;
    bool operator<(const Neighbor& o) const { return dist2 < o.dist2 || (dist2 == o.dist2 && index < o.index); }
};

std::vector<Neighbor> nearest(const KnnState& s, std::span<const double> q) {
    const std::size_t k = std::min(s.k, s.points.rows());
    std::vector<Neighbor> best;
    best.reserve(k + 1);
    for (std::size_t i = 0; i < s.points.rows(); ++i) {
        auto p = s.points.row(i);
        double d = 0.0;
        for (std::size_t f = 0; f < q.size(); ++f) {
            const double t = p[f] - q[f];
            d += t * t;
        }
        if (best.size() == k && !(Neighbor{d, i} < best.back())) continue;
        Neighbor nb{d, i};
        best.insert(std::upper_bound(best.begin(), best.end(), nb), nb);
        if (best.size() > k) best.pop_back();
    }
    return best;
}

std::size_t knn_vote(const KnnState& s, std::span<const double> q, std::size_t n_classes, std::vector<double>* fractions) {
    const auto nb = nearest(s, q);
    std::vector<double> votes(n_classes, 0.0);
    std::vector<double> dist_sum(n_classes, 0.0);
    for (const auto& v : nb) {
        const auto c = static_cast<std::size_t>(s.classes[v.index]);
        votes[c] += 1.0;
        dist_sum[c] += std::sqrt(v.dist2);
    }
    std::size_t pick = 0;
    for (std::size_t c = 1; c < n_classes; ++c) {
        if (votes[c] > votes[pick] || (votes[c] == votes[pick] && votes[c] > 0.0 && dist_sum[c] < dist_sum[pick])) {
            pick = c;
        }
    }
    if (fractions) {
        for (auto& v : votes) v /= static_cast<double>(nb.size());
        *fractions = std::move(votes);
    }
    return pick;
}

// ---- Gaussian naive Bayes ---------------------------------------------------

GaussianNbState fit_gaussian_nb(const TrainingConfig& c, const Matrix& x, const Encoded& e) {
    const std::size_t n = x.rows();
    const std::size_t f = x.cols();
    const std::size_t k = e.classes.size();
    const double smoothing = c.get("var_smoothing");
    if (!(smoothing >= 0.0)) throw UsageError("var_smoothing must be non-negative");

    double max_var = 0.0;
    for (std::size_t j = 0; j < f; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += (x(i, j) - mean) * (x(i, j) - mean);
        max_var = std::max(max_var, ss / static_cast<double>(n));
    }
    // All-constant data would leave every variance at zero.
    const double epsilon = smoothing * (max_var > 0.0 ? max_var : 1.0);

    GaussianNbState s{Matrix(k, f), Matrix(k, f), std::vector<double>(k)};
    std::vector<double> counts(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto cls = static_cast<std::size_t>(e.y[i]);
        counts[cls] += 1.0;
        for (std::size_t j = 0; j < f; ++j) s.means(cls, j) += x(i, j);
    }
    for (std::size_t cls = 0; cls < k; ++cls) {
        for (std::size_t j = 0; j < f; ++j) s.means(cls, j) /= counts[cls];
        s.log_priors[cls] = std::log(counts[cls] / static_cast<double>(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto cls = static_cast<std::size_t>(e.y[i]);
        for (std::size_t j = 0; j < f; ++j) {
            const double d = x(i, j) - s.means(cls, j);
            s.variances(cls, j) += d * d;
        }
    }
    for (std::size_t cls = 0; cls < k; ++cls) {
        for (std::size_t j = 0; j < f; ++j) s.variances(cls, j) = s.variances(cls, j) / counts[cls] + epsilon;
    }
    return s;
}

void gaussian_nb_jll(const GaussianNbState& s, std::span<const double> q, std::span<double> out) {
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (std::size_t cls = 0; cls < s.log_priors.size(); ++cls) {
        double v = s.log_priors[cls];
        for (std::size_t j = 0; j < q.size(); ++j) {
            const double var = s.variances(cls, j);
            const double d = q[j] - s.means(cls, j);
            v -= 0.5 * (std::log(kTwoPi * var) + d * d / var);
        }
        out[cls] = v;
    }
}

// ---- linear models ----------------------------------------------------------

LinearState fit_logistic(const TrainingConfig& c, const Matrix& x, const Encoded& e, std::vector<double>& trace) {
    const double l2 = c.get("l2");
    if (!(l2 >= 0.0)) throw UsageError("l2 must be non-negative");
    const double lr = positive_param(c, "learning_rate");
    const std::size_t max_epochs = count_param(c, "max_epochs");
    const double tol = c.get("tolerance");
    const std::size_t k = e.classes.size();

    LinearState s{Matrix(k, x.cols()), std::vector<double>(k, 0.0)};
    Matrix gw;
    std::vector<double> gb;
    double loss = logistic::objective(x, e.y, s.weights, s.bias, l2, &gw, &gb);
    trace.push_back(loss);
    for (std::size_t epoch = 0; epoch < max_epochs; ++epoch) {
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < x.cols(); ++j) s.weights(i, j) -= lr * gw(i, j);
            s.bias[i] -= lr * gb[i];
        }
        const double next = logistic::objective(x, e.y, s.weights, s.bias, l2, &gw, &gb);
        trace.push_back(next);
        const bool converged = std::abs(loss - next) < tol;
        loss = next;
        if (converged) break;
    }
    return s;
}

// Pegasos-style full-batch subgradient descent per one-vs-rest head. The
// iterate with the lowest objective is kept, so each head's recorded
// objective (best so far) never increases.
LinearState fit_linear_svm(const TrainingConfig& c, const Matrix& x, const Encoded& e, std::vector<double>& trace) {
    const double l2 = positive_param(c, "l2");
    const std::size_t epochs = count_param(c, "epochs");
    const std::size_t k = e.classes.size();
    const std::size_t n = x.rows();
    const std::size_t f = x.cols();
    LinearState s{Matrix(k, f), std::vector<double>(k, 0.0)};
    std::vector<std::vector<double>> head_trace(k);

    parallel_for(k, [&](std::size_t cls) {
        std::vector<double> w(f, 0.0), grad(f);
        double b = 0.0;
        std::vector<double> best_w = w;
        double best_b = 0.0;
        double best = std::numeric_limits<double>::infinity();
        auto& tr = head_trace[cls];
        tr.reserve(epochs + 1);
        for (std::size_t t = 1; t <= epochs + 1; ++t) {
            std::fill(grad.begin(), grad.end(), 0.0);
            double grad_b = 0.0;
            double hinge = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double y = e.y[i] == static_cast<int>(cls) ? 1.0 : -1.0;
                auto row = x.row(i);
                double score = b;
                for (std::size_t j = 0; j < f; ++j) score += w[j] * row[j];
                const double margin = y * score;
                if (margin < 1.0) {
                    hinge += 1.0 - margin;
                    for (std::size_t j = 0; j < f; ++j) grad[j] -= y * row[j];
                    grad_b -= y;
                }
            }
            double norm2 = 0.0;
            for (double v : w) norm2 += v * v;
            const double objective = 0.5 * l2 * norm2 + hinge / static_cast<double>(n);
            if (objective < best) {
                best = objective;
                best_w = w;
                best_b = b;
            }
            tr.push_back(best);
            if (t > epochs) break;
            const double eta = 1.0 / (l2 * static_cast<double>(t));
            for (std::size_t j = 0; j < f; ++j) w[j] -= eta * (l2 * w[j] + grad[j] / static_cast<double>(n));
            b -= eta * grad_b / static_cast<double>(n);
        }
        for (std::size_t j = 0; j < f; ++j) s.weights(cls, j) = best_w[j];
        s.bias[cls] = best_b;
    });

    trace.assign(head_trace.front().size(), 0.0);
    for (const auto& tr : head_trace) {
        for (std::size_t t = 0; t < tr.size(); ++t) trace[t] += tr[t];
    }
    return s;
}

// ---- boosting ---------------------------------------------------------------

AdaBoostState fit_adaboost(const TrainingConfig& c, const Matrix& x, const Encoded& e,
                           std::vector<std::string>& notes) {
    const std::size_t rounds = count_param(c, "n_estimators");
    const std::size_t depth = std::max<std::size_t>(1, count_param(c, "max_depth"));
    const tree::SortedColumns sorted(x);
    std::vector<double> weights(x.rows(), 1.0 / static_cast<double>(x.rows()));
    Rng rng = Rng::substream(c.seed(), 0);
    AdaBoostState s;
    for (std::size_t m = 0; m < rounds; ++m) {
        auto round = adaboost::fit_round(x, sorted, e.y, e.classes.size(), weights, depth, rng);
        if (!round.accepted) {
            notes.push_back("round " + std::to_string(m) + ": weighted error " + std::to_string(round.error) +
                            " is no better than chance after one resample; boosting stopped");
            break;
        }
        s.stumps.push_back(std::move(round.stump));
        s.alphas.push_back(round.alpha);
        if (round.perfect) {
            notes.push_back("round " + std::to_string(m) + ": weak learner is perfect; alpha capped and boosting stopped");
            break;
        }
    }
    if (s.stumps.empty()) throw FitError("AdaBoost could not find a weak learner better than chance");
    return s;
}

GradientBoostingState fit_gradient_boosting(const TrainingConfig& c, const Matrix& x, const Encoded& e,
                                            std::vector<double>& trace) {
    const std::size_t stages = count_param(c, "n_estimators");
    const std::size_t depth = count_param(c, "max_depth");
    const double lr = positive_param(c, "learning_rate");
    const std::size_t k = e.classes.size();
    const std::size_t n = x.rows();

    GradientBoostingState s;
    s.learning_rate = lr;
    s.initial.assign(k, 0.0);
    std::vector<double> counts(k, 0.0);
    for (int y : e.y) counts[static_cast<std::size_t>(y)] += 1.0;
    for (std::size_t cls = 0; cls < k; ++cls) s.initial[cls] = std::log(counts[cls] / static_cast<double>(n));

    Matrix raw(n, k);
    for (std::size_t i = 0; i < n; ++i) std::copy(s.initial.begin(), s.initial.end(), raw.row(i).begin());
    const tree::SortedColumns sorted(x);
    trace.push_back(gboost::log_loss(raw, e.y));
    for (std::size_t m = 0; m < stages; ++m) {
        Rng rng = Rng::substream(c.seed(), m);
        s.stages.push_back(gboost::fit_stage(x, sorted, e.y, k, raw, lr, depth, rng));
        trace.push_back(gboost::log_loss(raw, e.y));
    }
    return s;
}

void check_features(const Matrix& x) {
    for (double v : x.data()) {
        if (!std::isfinite(v)) throw DataError("features must be finite");
    }
}

// ---- serialization ----------------------------------------------------------

using nlohmann::json;
using jsonutil::Reader;

json tree_to_json(const tree::Tree& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes()) nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right}));
    return {{"width", t.value_width()}, {"nodes", std::move(nodes)}, {"values", t.values()}};
}

tree::Tree tree_from_json(const Reader& r) {
    const auto width = static_cast<std::size_t>(r.unsigned_integer("width"));
    auto nodes_in = r.array("nodes");
    std::vector<tree::Node> nodes;
    for (std::size_t i = 0; i < nodes_in.size(); ++i) {
        auto nr = nodes_in.at(i);
        const auto& a = nr.node();
        if (!a.is_array() || a.size() != 4) throw ParseError(nr.path() + " must be [feature, threshold, left, right]", nr.path());
        tree::Node node;
        node.feature = static_cast<std::int32_t>(Reader(a[0], nr.path()).as_integer());
        node.threshold = Reader(a[1], nr.path()).as_number();
        node.left = static_cast<std::int32_t>(Reader(a[2], nr.path()).as_integer());
        node.right = static_cast<std::int32_t>(Reader(a[3], nr.path()).as_integer());
        const auto limit = static_cast<std::int32_t>(nodes_in.size());
        if (!node.is_leaf() && (node.left <= static_cast<std::int32_t>(i) || node.right <= static_cast<std::int32_t>(i) ||
                                node.left >= limit || node.right >= limit)) {
            throw ParseError(nr.path() + " has invalid child links", nr.path());
        }
        nodes.push_back(node);
    }
    auto values = r.numbers("values");
    if (nodes.empty() || values.size() != nodes.size() * width) throw ParseError(r.path() + " value table mismatch", r.path());
    return tree::Tree(width, std::move(nodes), std::move(values));
}

json trees_to_json(const std::vector<tree::Tree>& trees) {
    json a = json::array();
    for (const auto& t : trees) a.push_back(tree_to_json(t));
    return a;
}

std::vector<tree::Tree> trees_from_json(const Reader& r, std::string_view key) {
    auto arr = r.array(key);
    std::vector<tree::Tree> out;
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(tree_from_json(arr.at(i)));
    return out;
}

json state_to_json(const ModelState& state) {
    return std::visit(
        [](const auto& s) -> json {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, TreeState>) {
                return {{"tree", tree_to_json(s.tree)}};
            } else if constexpr (std::is_same_v<S, ForestState>) {
                return {{"trees", trees_to_json(s.trees)}};
            } else if constexpr (std::is_same_v<S, KnnState>) {
                return {{"k", s.k}, {"points", jsonutil::to_json(s.points)}, {"classes", s.classes}};
            } else if constexpr (std::is_same_v<S, GaussianNbState>) {
                return {{"means", jsonutil::to_json(s.means)},
                        {"variances", jsonutil::to_json(s.variances)},
                        {"log_priors", s.log_priors}};
            } else if constexpr (std::is_same_v<S, LinearState>) {
                return {{"weights", jsonutil::to_json(s.weights)}, {"bias", s.bias}};
            } else if constexpr (std::is_same_v<S, AdaBoostState>) {
                return {{"stumps", trees_to_json(s.stumps)}, {"alphas", s.alphas}};
            } else {
                json stages = json::array();
                for (const auto& st : s.stages) stages.push_back(trees_to_json(st));
                return {{"initial", s.initial}, {"learning_rate", s.learning_rate}, {"stages", std::move(stages)}};
            }
        },
        state);
}

ModelState state_from_json(Algorithm a, const Reader& r) {
    switch (a) {
        case Algorithm::DecisionTree:
            return TreeState{tree_from_json(r.object("tree"))};
        case Algorithm::RandomForest:
            return ForestState{trees_from_json(r, "trees")};
        case Algorithm::KNNeighbors: {
            KnnState s;
            s.k = static_cast<std::size_t>(r.unsigned_integer("k"));
            s.points = jsonutil::matrix_from(r, "points");
            for (auto v : r.integers("classes")) s.classes.push_back(static_cast<int>(v));
            if (s.classes.size() != s.points.rows()) throw ParseError("state.classes length mismatch", "state.classes");
            return s;
        }
        case Algorithm::GaussianNB:
            return GaussianNbState{jsonutil::matrix_from(r, "means"), jsonutil::matrix_from(r, "variances"),
                                   r.numbers("log_priors")};
        case Algorithm::LogisticRegression:
        case Algorithm::LinearSVM:
            return LinearState{jsonutil::matrix_from(r, "weights"), r.numbers("bias")};
        case Algorithm::AdaBoost:
            return AdaBoostState{trees_from_json(r, "stumps"), r.numbers("alphas")};
        case Algorithm::GradientBoosting: {
            GradientBoostingState s;
            s.initial = r.numbers("initial");
            s.learning_rate = r.number("learning_rate");
            auto stages = r.array("stages");
            for (std::size_t i = 0; i < stages.size(); ++i) {
                auto st = stages.at(i);
                if (!st.node().is_array()) throw ParseError(st.path() + " must be an array", st.path());
                std::vector<tree::Tree> trees;
                for (std::size_t j = 0; j < st.node().size(); ++j) {
                    trees.push_back(tree_from_json(Reader(st.node()[j], st.path() + "[" + std::to_string(j) + "]")));
                }
                s.stages.push_back(std::move(trees));
            }
            return s;
        }
    }
    throw ParseError("unknown algorithm", "algorithm");
}

}  // namespace

const Hyperparameters& default_hyperparameters(Algorithm algorithm) { return defaults_table().at(algorithm); }

TrainingConfig::TrainingConfig(Algorithm algorithm, std::uint64_t seed, const Hyperparameters& overrides)
    : algorithm_(algorithm), seed_(seed), hyper_(default_hyperparameters(algorithm)) {
    for (const auto& [name, value] : overrides) {
        auto it = hyper_.find(name);
        if (it == hyper_.end()) {
            std::string valid;
            for (const auto& [n, v] : hyper_) valid += (valid.empty() ? "" : ", ") + n;
            throw UsageError("unknown hyperparameter \"" + name + "\" for " + std::string(domain::to_string(algorithm)) +
                             "; valid names: " + valid);
        }
        if (!std::isfinite(value)) throw UsageError("hyperparameter " + name + " must be finite");
        it->second = value;
    }
}

std::size_t argmax(std::span<const double> values) {
    return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

TrainedClassifier::TrainedClassifier(TrainingConfig config, std::vector<Label> classes, std::size_t n_features,
                                     ModelState state)
    : config_(std::move(config)), classes_(std::move(classes)), n_features_(n_features), state_(std::move(state)) {}

void TrainedClassifier::check_width(const Matrix& features) const {
    if (features.cols() != n_features_) {
        throw DataError("model expects " + std::to_string(n_features_) + " features, got " +
                        std::to_string(features.cols()));
    }
}

Matrix TrainedClassifier::scores(const Matrix& x) const {
    const std::size_t k = classes_.size();
    Matrix out(x.rows(), k);
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            for (std::size_t i = 0; i < x.rows(); ++i) {
                auto q = x.row(i);
                auto o = out.row(i);
                if constexpr (std::is_same_v<S, TreeState>) {
                    auto v = s.tree.predict(q);
                    std::copy(v.begin(), v.end(), o.begin());
                } else if constexpr (std::is_same_v<S, ForestState>) {
                    for (const auto& t : s.trees) o[t.predict_class(q)] += 1.0;
                } else if constexpr (std::is_same_v<S, KnnState>) {
                    std::vector<double> frac;
                    knn_vote(s, q, k, &frac);
                    std::copy(frac.begin(), frac.end(), o.begin());
                } else if constexpr (std::is_same_v<S, GaussianNbState>) {
                    gaussian_nb_jll(s, q, o);
                } else if constexpr (std::is_same_v<S, LinearState>) {
                    for (std::size_t c = 0; c < k; ++c) {
                        double z = s.bias[c];
                        for (std::size_t j = 0; j < q.size(); ++j) z += s.weights(c, j) * q[j];
                        o[c] = z;
                    }
                } else if constexpr (std::is_same_v<S, AdaBoostState>) {
                    for (std::size_t m = 0; m < s.stumps.size(); ++m) o[s.stumps[m].predict_class(q)] += s.alphas[m];
                } else {
                    std::copy(s.initial.begin(), s.initial.end(), o.begin());
                    for (const auto& stage : s.stages) {
                        for (std::size_t c = 0; c < k; ++c) o[c] += s.learning_rate * stage[c].predict(q)[0];
                    }
                }
            }
        },
        state_);
    return out;
}

std::vector<Label> TrainedClassifier::predict(const Matrix& features) const {
    check_width(features);
    std::vector<Label> out(features.rows());
    if (const auto* knn = std::get_if<KnnState>(&state_)) {
        for (std::size_t i = 0; i < features.rows(); ++i) {
            out[i] = classes_[knn_vote(*knn, features.row(i), classes_.size(), nullptr)];
        }
        return out;
    }
    const Matrix s = scores(features);
    for (std::size_t i = 0; i < features.rows(); ++i) out[i] = classes_[argmax(s.row(i))];
    return out;
}

Matrix TrainedClassifier::predict_proba(const Matrix& features) const {
    check_width(features);
    if (!supports_proba()) throw CapabilityError("LinearSVM does not provide class probabilities");
    Matrix s = scores(features);
    for (std::size_t i = 0; i < s.rows(); ++i) {
        auto row = s.row(i);
        switch (algorithm()) {
            case Algorithm::GaussianNB:
            case Algorithm::LogisticRegression:
            case Algorithm::GradientBoosting:
                softmax_inplace(row);
                break;
            case Algorithm::RandomForest:
            case Algorithm::AdaBoost: {
                const double total = std::accumulate(row.begin(), row.end(), 0.0);
                for (double& v : row) v /= total;
                break;
            }
            default:
                break;
        }
    }
    return s;
}

bool TrainedClassifier::same_model(const TrainedClassifier& o) const {
    return config_ == o.config_ && classes_ == o.classes_ && n_features_ == o.n_features_ && state_ == o.state_;
}

std::string TrainedClassifier::serialize() const {
    json doc = {{"format", "drivepred.classifier"},
                {"version", 1},
                {"algorithm", domain::to_string(algorithm())},
                {"seed", config_.seed()},
                {"hyperparameters", config_.hyperparameters()},
                {"classes", classes_},
                {"n_features", n_features_},
                {"state", state_to_json(state_)}};
    return doc.dump() + "\n";
}

TrainedClassifier TrainedClassifier::deserialize(std::string_view document) {
    const json doc = jsonutil::parse(document);
    Reader root(doc, "");
    root.expect_format("drivepred.classifier", 1);
    const auto algorithm = domain::parse_enum<Algorithm>(root.string("algorithm"), "algorithm");
    Hyperparameters hyper;
    Reader h = root.object("hyperparameters");
    for (const auto& [name, value] : h.node().items()) hyper[name] = Reader(value, h.path(name)).as_number();
    TrainingConfig config(algorithm, root.unsigned_integer("seed"), hyper);
    std::vector<Label> classes;
    for (auto v : root.integers("classes")) classes.push_back(static_cast<Label>(v));
    if (classes.empty() || !std::is_sorted(classes.begin(), classes.end())) {
        throw ParseError("classes must be a nonempty sorted list", "classes");
    }
    const auto n_features = static_cast<std::size_t>(root.unsigned_integer("n_features"));
    return TrainedClassifier(std::move(config), std::move(classes), n_features,
                             state_from_json(algorithm, root.object("state")));
}

TrainedClassifier fit(const TrainingConfig& config, const Matrix& features, const std::vector<Label>& labels) {
    if (features.rows() == 0) throw DataError("cannot fit on an empty dataset");
    if (features.cols() == 0) throw DataError("cannot fit without features");
    if (labels.size() != features.rows()) throw DataError("label count does not match row count");
    check_features(features);
    const Encoded e = encode(labels);
    const std::size_t k = e.classes.size();
    const Algorithm a = config.algorithm();

    std::vector<double> trace;
    std::vector<std::string> notes;
    ModelState state;
    switch (a) {
        case Algorithm::DecisionTree: {
            tree::TreeParams p{count_param(config, "max_depth"), count_param(config, "min_samples_split"), 0};
            const tree::SortedColumns sorted(features);
            const std::vector<double> w(features.rows(), 1.0);
            Rng rng = Rng::substream(config.seed(), 0);
            state = TreeState{tree::grow_classification_tree(features, sorted, e.y, k, w, p, rng)};
            break;
        }
        case Algorithm::RandomForest:
            state = fit_forest(config, features, e);
            break;
        case Algorithm::KNNeighbors: {
            const std::size_t kk = count_param(config, "k");
            if (kk == 0) throw UsageError("k must be at least 1");
            state = KnnState{kk, features, e.y};
            break;
        }
        case Algorithm::GaussianNB:
            state = fit_gaussian_nb(config, features, e);
            break;
        case Algorithm::LogisticRegression:
            require_multiclass(e, a);
            state = fit_logistic(config, features, e, trace);
            break;
        case Algorithm::LinearSVM:
            require_multiclass(e, a);
            state = fit_linear_svm(config, features, e, trace);
            break;
        case Algorithm::AdaBoost:
            require_multiclass(e, a);
            state = fit_adaboost(config, features, e, notes);
            break;
        case Algorithm::GradientBoosting:
            require_multiclass(e, a);
            state = fit_gradient_boosting(config, features, e, trace);
            break;
    }
    TrainedClassifier model(config, e.classes, features.cols(), std::move(state));
    model.loss_trace_ = std::move(trace);
    model.diagnostics_ = std::move(notes);
    return model;
}

namespace logistic {

double objective(const Matrix& x, std::span<const int> classes, const Matrix& weights, std::span<const double> bias,
                 double l2, Matrix* grad_weights, std::vector<double>* grad_bias) {
    const std::size_t n = x.rows();
    const std::size_t f = x.cols();
    const std::size_t k = weights.rows();
    if (grad_weights) *grad_weights = Matrix(k, f);
    if (grad_bias) grad_bias->assign(k, 0.0);
    std::vector<double> z(k);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto row = x.row(i);
        for (std::size_t c = 0; c < k; ++c) {
            double v = bias[c];
            for (std::size_t j = 0; j < f; ++j) v += weights(c, j) * row[j];
            z[c] = v;
        }
        const double m = *std::max_element(z.begin(), z.end());
        double s = 0.0;
        for (double v : z) s += std::exp(v - m);
        const auto y = static_cast<std::size_t>(classes[i]);
        loss += m + std::log(s) - z[y];
        if (grad_weights || grad_bias) {
            for (std::size_t c = 0; c < k; ++c) {
                const double g = std::exp(z[c] - m) / s - (c == y ? 1.0 : 0.0);
                if (grad_bias) (*grad_bias)[c] += g;
                if (grad_weights) {
                    for (std::size_t j = 0; j < f; ++j) (*grad_weights)(c, j) += g * row[j];
                }
            }
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    double norm2 = 0.0;
    for (double w : weights.data()) norm2 += w * w;
    if (grad_weights) {
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t j = 0; j < f; ++j) {
                (*grad_weights)(c, j) = (*grad_weights)(c, j) * inv_n + l2 * inv_n * weights(c, j);
            }
        }
    }
    if (grad_bias) {
        for (double& g : *grad_bias) g *= inv_n;
    }
    return loss * inv_n + 0.5 * l2 * inv_n * norm2;
}

}  // namespace logistic

namespace adaboost {

double samme_alpha(double error, std::size_t n_classes) {
    if (error <= 0.0) return std::log(1e12);
    return std::log((1.0 - error) / error) + std::log(static_cast<double>(n_classes) - 1.0);
}

namespace {

double weighted_error(const tree::Tree& stump, const Matrix& x, std::span<const int> classes,
                      const std::vector<double>& weights, std::vector<std::uint8_t>& miss) {
    double err = 0.0;
    double total = 0.0;
    miss.assign(x.rows(), 0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        total += weights[i];
        if (static_cast<int>(stump.predict_class(x.row(i))) != classes[i]) {
            miss[i] = 1;
            err += weights[i];
        }
    }
    return err / total;
}

}  // namespace

Round fit_round(const Matrix& x, const tree::SortedColumns& sorted, std::span<const int> classes,
                std::size_t n_classes, std::vector<double>& weights, std::size_t max_depth, Rng& rng) {
    if (n_classes < 2) throw FitError("AdaBoost needs at least two classes");
    tree::TreeParams params;
    params.max_depth = max_depth;
    const double chance = static_cast<double>(n_classes - 1) / static_cast<double>(n_classes);

    Round r;
    std::vector<std::uint8_t> miss;
    r.stump = tree::grow_classification_tree(x, sorted, classes, n_classes, weights, params, rng);
    r.error = weighted_error(r.stump, x, classes, weights, miss);
    if (r.error >= chance) {
        // One retry on a weighted resample of the rows.
        std::vector<double> cumulative(weights.size());
        std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
        std::vector<double> counts(weights.size(), 0.0);
        for (std::size_t i = 0; i < weights.size(); ++i) {
            const double u = rng.uniform() * cumulative.back();
            auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
            counts[static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                                     static_cast<std::ptrdiff_t>(weights.size()) - 1))] += 1.0;
        }
        r.stump = tree::grow_classification_tree(x, sorted, classes, n_classes, counts, params, rng);
        r.error = weighted_error(r.stump, x, classes, weights, miss);
        if (r.error >= chance) return r;
    }
    r.accepted = true;
    r.perfect = r.error <= 0.0;
    r.alpha = samme_alpha(r.error, n_classes);
    const double boost = std::exp(r.alpha);
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (miss[i]) weights[i] *= boost;
        total += weights[i];
    }
    for (double& w : weights) w /= total;
    return r;
}

}  // namespace adaboost

namespace gboost {

double log_loss(const Matrix& raw, std::span<const int> classes) {
    double loss = 0.0;
    for (std::size_t i = 0; i < raw.rows(); ++i) {
        auto z = raw.row(i);
        const double m = *std::max_element(z.begin(), z.end());
        double s = 0.0;
        for (double v : z) s += std::exp(v - m);
        loss += m + std::log(s) - z[static_cast<std::size_t>(classes[i])];
    }
    return loss / static_cast<double>(raw.rows());
}

std::vector<tree::Tree> fit_stage(const Matrix& x, const tree::SortedColumns& sorted, std::span<const int> classes,
                                  std::size_t n_classes, Matrix& raw, double learning_rate, std::size_t max_depth,
                                  Rng& rng) {
    const std::size_t n = x.rows();
    const std::size_t k = n_classes;
    Matrix prob = raw;
    for (std::size_t i = 0; i < n; ++i) softmax_inplace(prob.row(i));

    tree::TreeParams params;
    params.max_depth = max_depth;
    const std::vector<double> weights(n, 1.0);
    const double scale = static_cast<double>(k - 1) / static_cast<double>(k);
    std::vector<tree::Tree> trees(k);
    std::vector<Rng> rngs;
    for (std::size_t c = 0; c < k; ++c) rngs.emplace_back(rng.next_u64());
    parallel_for(k, [&](std::size_t c) {
        std::vector<double> residual(n);
        for (std::size_t i = 0; i < n; ++i) {
            residual[i] = (classes[i] == static_cast<int>(c) ? 1.0 : 0.0) - prob(i, c);
        }
        auto newton = [&](std::span<const std::uint32_t> rows) {
            double num = 0.0;
            double den = 0.0;
            for (auto r : rows) {
                const double v = residual[r];
                num += v;
                den += std::abs(v) * (1.0 - std::abs(v));
            }
            return den < 1e-150 ? 0.0 : scale * num / den;
        };
        trees[c] = tree::grow_regression_tree(x, sorted, residual, weights, params, rngs[c], newton);
    });
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < k; ++c) raw(i, c) += learning_rate * trees[c].predict(x.row(i))[0];
    }
    return trees;
}

}  // namespace gboost

}  // namespace drivepred::classifiers
