#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "drivepred/classifiers.hpp"
#include "drivepred/evaluation.hpp"
#include "drivepred/ingestion.hpp"
#include "drivepred/preprocess.hpp"

// End-to-end glue: recordings in, labeled datasets, trained bundles and
// comparison reports out.

namespace drivepred::pipeline {

/// Discretized labels; missing speeds become ingestion::kMissingLabel.
std::vector<Label> speed_labels(const std::vector<double>& speeds_kmh);

/// Feature/label projection of one recording.
ingestion::LabeledDataset labeled(const ingestion::RecordingMatrix& rec);

/// Rows of all parts, in order. Feature names must agree.
ingestion::LabeledDataset concatenate(const std::vector<ingestion::LabeledDataset>& parts);

/// The *.csv files of a directory in name order, or the path itself when it
/// names a file. Throws UsageError when nothing matches.
std::vector<std::string> recording_files(const std::string& path);

/// Loads and concatenates every recording under `path`.
ingestion::LabeledDataset load_dataset(const std::string& path, double sample_rate = 1.0);

/// A classifier together with the standardization it was trained behind.
struct ModelBundle {
    std::vector<std::string> feature_names;
    preprocess::StandardizationParams standardizer;
    classifiers::TrainedClassifier classifier;

    /// Predictions for raw (unstandardized) features.
    std::vector<Label> predict(const Matrix& raw_features) const;

    std::string serialize() const;
    static ModelBundle deserialize(std::string_view document);
};

/// Fits the standardizer and the classifier on the whole dataset.
ModelBundle train_bundle(const classifiers::TrainingConfig& config, const ingestion::LabeledDataset& data);

/// Throws DataError when the dataset's features differ from the bundle's.
void check_features(const ModelBundle& bundle, const ingestion::LabeledDataset& data);

struct CompareOptions {
    std::vector<domain::Algorithm> algorithms = domain::all_algorithms();
    double test_fraction = preprocess::kDefaultTestFraction;
    std::size_t folds = preprocess::kDefaultFolds;
    /// Leave KNN out of cross-validation (it still appears in the holdout).
    bool exclude_knn_from_cv = false;
    /// Fit the standardizer on all rows, test included, before splitting.
    bool fit_on_all = false;
};

struct CompareResult {
    preprocess::SplitPlan plan;
    std::vector<evaluation::CVResult> cv;  // in options.algorithms order
    std::vector<evaluation::HoldoutColumn> holdout;  // algorithms whose holdout fit succeeded
    std::vector<std::string> warnings;

    bool all_failed() const { return holdout.empty(); }
};

/// Split, 5-fold cross-validation on the training part, then a fit on the
/// whole training part scored on the held-out part, for each algorithm.
CompareResult compare(const ingestion::LabeledDataset& data, std::uint64_t seed, const CompareOptions& options = {});

/// Human-readable report: cross-validation table, holdout table, warnings.
std::string render_comparison(const CompareResult& result);

/// Route points rebuilt from a recording's distance and route channels,
/// one per distinct distance.
domain::Route route_from_recording(const ingestion::RecordingMatrix& rec);

/// Linear interpolation of a (distance, speed) trace at the given
/// distances; distances past the end take the last speed.
std::vector<double> speed_at_distances(const std::vector<double>& trace_distance, const std::vector<double>& trace_speed,
                                       const std::vector<double>& distances);

/// Columns for a recorded vs rule-based (vs predicted) speed plot.
struct ProfileComparison {
    std::vector<double> distance;
    std::vector<double> recorded;
    std::vector<double> rule_based;
    std::vector<double> predicted;  // class midpoints; empty without a model
};

/// Tab-separated columns with a header row, then one RMSE line per pair.
std::string render_profiles(const ProfileComparison& p);

/// Class c is drawn at the bin midpoint 10c + 5 km/h.
double class_midpoint(Label c);

/// Root mean square difference; throws DataError on a length mismatch.
double rmse(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace drivepred::pipeline
