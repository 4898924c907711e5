#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "drivepred/common.hpp"
#include "drivepred/domain.hpp"
#include "drivepred/tree.hpp"

namespace drivepred::classifiers {

using domain::Algorithm;
using Hyperparameters = std::map<std::string, double>;

/// The data cannot support the requested model (e.g. a single class for a
/// discriminative objective).
class FitError : public DataError {
public:
    using DataError::DataError;
};

/// The model family does not provide the requested output.
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// Default hyperparameters per family. Names outside this table are
/// rejected by TrainingConfig.
///
///   DecisionTree        max_depth=0 (unlimited), min_samples_split=2
///   RandomForest        n_estimators=100, max_features=0 (ceil(sqrt F)),
///                       bootstrap=1, max_depth=0, min_samples_split=2
///   KNNeighbors         k=5
///   GaussianNB          var_smoothing=1e-9 (times the largest feature variance)
///   LogisticRegression  l2=1, learning_rate=0.1, max_epochs=1000, tolerance=1e-6
///   LinearSVM           l2=1, epochs=1000
///   AdaBoost            n_estimators=50, max_depth=1
///   GradientBoosting    n_estimators=100, max_depth=3, learning_rate=0.1
const Hyperparameters& default_hyperparameters(Algorithm algorithm);

class TrainingConfig {
public:
    /// Overrides are merged over the defaults; unknown names throw UsageError.
    TrainingConfig(Algorithm algorithm, std::uint64_t seed, const Hyperparameters& overrides = {});

    Algorithm algorithm() const { return algorithm_; }
    std::uint64_t seed() const { return seed_; }
    const Hyperparameters& hyperparameters() const { return hyper_; }
    double get(const std::string& name) const { return hyper_.at(name); }

    friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;

private:
    Algorithm algorithm_;
    std::uint64_t seed_;
    Hyperparameters hyper_;
};

struct TreeState {
    tree::Tree tree;
    friend bool operator==(const TreeState&, const TreeState&) = default;
};
struct ForestState {
    std::vector<tree::Tree> trees;
    friend bool operator==(const ForestState&, const ForestState&) = default;
};
struct KnnState {
    std::size_t k = 5;
    Matrix points;
    std::vector<int> classes;  // class indices, parallel to points
    friend bool operator==(const KnnState&, const KnnState&) = default;
};
struct GaussianNbState {
    Matrix means;  // K x F
    Matrix variances;  // K x F, smoothing included
    std::vector<double> log_priors;
    friend bool operator==(const GaussianNbState&, const GaussianNbState&) = default;
};
/// Softmax regression (weights K x F) or one-vs-rest SVM scores.
struct LinearState {
    Matrix weights;
    std::vector<double> bias;
    friend bool operator==(const LinearState&, const LinearState&) = default;
};
struct AdaBoostState {
    std::vector<tree::Tree> stumps;
    std::vector<double> alphas;
    friend bool operator==(const AdaBoostState&, const AdaBoostState&) = default;
};
struct GradientBoostingState {
    std::vector<double> initial;  // K raw scores
    double learning_rate = 0.1;
    std::vector<std::vector<tree::Tree>> stages;  // stage x class
    friend bool operator==(const GradientBoostingState&, const GradientBoostingState&) = default;
};

using ModelState = std::variant<TreeState, ForestState, KnnState, GaussianNbState, LinearState, AdaBoostState,
                                GradientBoostingState>;

/// A fitted model. Immutable after fit; predict is reentrant.
class TrainedClassifier {
public:
    TrainedClassifier(TrainingConfig config, std::vector<Label> classes, std::size_t n_features, ModelState state);

    Algorithm algorithm() const { return config_.algorithm(); }
    const TrainingConfig& config() const { return config_; }
    /// Sorted labels seen in training; predictions only come from this list.
    const std::vector<Label>& classes() const { return classes_; }
    std::size_t n_features() const { return n_features_; }
    const ModelState& state() const { return state_; }

    std::vector<Label> predict(const Matrix& features) const;
    /// N x K probabilities, columns in classes() order. Throws
    /// CapabilityError for LinearSVM.
    Matrix predict_proba(const Matrix& features) const;
    bool supports_proba() const { return algorithm() != Algorithm::LinearSVM; }

    /// Objective value per epoch/stage for iterative fits (LogisticRegression,
    /// LinearSVM, GradientBoosting); empty otherwise. Not serialized.
    const std::vector<double>& loss_trace() const { return loss_trace_; }
    /// Free-form notes from fitting (early stops, rejected learners).
    const std::vector<std::string>& diagnostics() const { return diagnostics_; }

    std::string serialize() const;
    static TrainedClassifier deserialize(std::string_view document);

    /// Equality of configuration, classes and fitted state.
    bool same_model(const TrainedClassifier& other) const;

private:
    friend TrainedClassifier fit(const TrainingConfig&, const Matrix&, const std::vector<Label>&);

    // Per-row scores whose argmax (lowest index on ties) is the prediction.
    Matrix scores(const Matrix& features) const;
    void check_width(const Matrix& features) const;

    TrainingConfig config_;
    std::vector<Label> classes_;
    std::size_t n_features_;
    ModelState state_;
    std::vector<double> loss_trace_;
    std::vector<std::string> diagnostics_;
};

/// Deterministic in (config including seed, data).
TrainedClassifier fit(const TrainingConfig& config, const Matrix& features, const std::vector<Label>& labels);

/// Index of the largest entry, lowest index on ties.
std::size_t argmax(std::span<const double> values);

// Building blocks exposed for tests and diagnostics.

namespace logistic {

/// Mean multinomial log-loss plus (l2 / 2N) * ||W||^2 (bias unpenalized).
/// Writes the analytic gradient when the output pointers are non-null.
double objective(const Matrix& x, std::span<const int> classes, const Matrix& weights, std::span<const double> bias,
                 double l2, Matrix* grad_weights = nullptr, std::vector<double>* grad_bias = nullptr);

}  // namespace logistic

namespace adaboost {

struct Round {
    tree::Tree stump;
    double error = 0.0;
    double alpha = 0.0;
    bool accepted = false;  // false when the learner was no better than chance
    bool perfect = false;   // zero weighted error; alpha capped
};

/// alpha for a weighted error eps with K classes: ln((1-eps)/eps) + ln(K-1),
/// capped at ln(1e12) when eps == 0.
double samme_alpha(double error, std::size_t n_classes);

/// One SAMME round on stumps: fits a weighted depth-`max_depth` tree,
/// retrying once on a weighted resample if it is no better than chance, and
/// reweights `weights` in place (normalized to sum 1) when accepted.
Round fit_round(const Matrix& x, const tree::SortedColumns& sorted, std::span<const int> classes,
                std::size_t n_classes, std::vector<double>& weights, std::size_t max_depth, Rng& rng);

}  // namespace adaboost

namespace gboost {

/// Mean multinomial log-loss of raw scores (N x K).
double log_loss(const Matrix& raw, std::span<const int> classes);

/// One boosting stage: K regression trees fitted to the softmax residuals,
/// with Newton leaf values. `raw` is advanced by learning_rate * tree output.
std::vector<tree::Tree> fit_stage(const Matrix& x, const tree::SortedColumns& sorted, std::span<const int> classes,
                                  std::size_t n_classes, Matrix& raw, double learning_rate, std::size_t max_depth,
                                  Rng& rng);

}  // namespace gboost

}  // namespace drivepred::classifiers
