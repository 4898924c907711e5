#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drivepred/classifiers.hpp"
#include "drivepred/common.hpp"
#include "drivepred/preprocess.hpp"

namespace drivepred::evaluation {

/// counts[t][p] = samples of true class class_list[t] predicted as class_list[p].
class ConfusionMatrix {
public:
    ConfusionMatrix(std::vector<Label> class_list, std::vector<std::vector<std::int64_t>> counts);

    const std::vector<Label>& class_list() const { return classes_; }
    const std::vector<std::vector<std::int64_t>>& counts() const { return counts_; }
    std::size_t size() const { return classes_.size(); }
    std::int64_t total() const { return total_; }

    std::int64_t tp(std::size_t k) const { return counts_[k][k]; }
    std::int64_t fp(std::size_t k) const;
    std::int64_t fn(std::size_t k) const;
    std::int64_t tn(std::size_t k) const { return total_ - tp(k) - fp(k) - fn(k); }
    std::int64_t support(std::size_t k) const { return tp(k) + fn(k); }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::vector<Label> classes_;
    std::vector<std::vector<std::int64_t>> counts_;
    std::int64_t total_ = 0;
};

/// class_list is the sorted union of the labels in both vectors.
ConfusionMatrix confusion_matrix(const std::vector<Label>& y_true, const std::vector<Label>& y_pred);

struct ClassMetrics {
    Label label = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
    /// True when a zero denominator forced a metric to 0.
    bool zero_division = false;
};

/// precision = TP/(TP+FP), recall = TP/(TP+FN), f1 = 2PR/(P+R); each is 0
/// when its denominator is 0.
std::vector<ClassMetrics> class_metrics(const ConfusionMatrix& cm);

/// trace / total.
double accuracy(const ConfusionMatrix& cm);

struct WeightedMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
};

/// Support-weighted means; throws DataError when every support is zero.
WeightedMetrics weighted_average(const std::vector<ClassMetrics>& per_class);

struct EvaluationReport {
    std::vector<ClassMetrics> per_class;
    double accuracy = 0.0;
    WeightedMetrics weighted;
    std::int64_t total_support = 0;
    std::size_t zero_division_count = 0;
};

EvaluationReport evaluate(const std::vector<Label>& y_true, const std::vector<Label>& y_pred);
EvaluationReport evaluate_holdout(const classifiers::TrainedClassifier& model, const Matrix& features,
                                  const std::vector<Label>& labels);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population
};

MeanStd mean_std(const std::vector<double>& values);

struct FoldResult {
    std::size_t fold = 0;
    bool ok = false;
    std::string diagnostic;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
};

struct CVResult {
    domain::Algorithm algorithm;
    std::vector<FoldResult> folds;
    MeanStd precision, recall, f1, accuracy;
    std::size_t failed_folds = 0;
    /// Set when the algorithm was excluded from validation (KNN under the
    /// paper-fidelity option); folds are then empty.
    bool skipped = false;
    bool all_failed() const { return !skipped && failed_folds == folds.size(); }
};

struct CVOptions {
    /// Fit the standardizer on each fold's training part and apply it to the
    /// validation part. Off when the features were already standardized.
    bool standardize_per_fold = true;
    /// KNN stores its training set rather than fitting a model, so the
    /// paper-fidelity mode leaves it out of validation.
    bool exclude_knn = false;
};

/// For each fold k: fit on the other folds, score fold k. Folds whose fit
/// throws FitError are recorded as failed and excluded from the statistics.
CVResult cross_validate(const classifiers::TrainingConfig& config, const Matrix& features,
                        const std::vector<Label>& labels, const preprocess::SplitPlan& plan,
                        const CVOptions& options = {});

// ---- rendering -------------------------------------------------------------

/// Aligned per-class table with accuracy and weighted-average rows.
std::string render_class_table(const EvaluationReport& report, const std::string& title);

/// Cross-validation comparison: one column pair (AVG, STD) per algorithm.
std::string render_cv_table(const std::vector<CVResult>& results);

struct HoldoutColumn {
    domain::Algorithm algorithm;
    EvaluationReport report;
};

/// Holdout comparison: weighted precision, recall, F1 per algorithm.
std::string render_holdout_table(const std::vector<HoldoutColumn>& columns);

/// Structured (JSON) forms; values keep full precision.
std::string report_document(const EvaluationReport& report);
std::string comparison_document(const std::vector<CVResult>& cv, const std::vector<HoldoutColumn>& holdout,
                                std::uint64_t seed);

}  // namespace drivepred::evaluation
