#include "drivepred/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>

#include "json_util.hpp"

namespace drivepred::pipeline {

namespace fs = std::filesystem;
using ingestion::LabeledDataset;

std::vector<Label> speed_labels(const std::vector<double>& speeds_kmh) {
    std::vector<Label> out;
    out.reserve(speeds_kmh.size());
    for (double v : speeds_kmh) out.push_back(ingestion::is_missing(v) ? ingestion::kMissingLabel : preprocess::discretize_speed(v));
    return out;
}

LabeledDataset labeled(const ingestion::RecordingMatrix& rec) {
    return ingestion::select_features(rec, speed_labels(ingestion::extract_target(rec)));
}

LabeledDataset concatenate(const std::vector<LabeledDataset>& parts) {
    LabeledDataset out;
    if (parts.empty()) return out;
    out.feature_names = parts.front().feature_names;
    std::size_t rows = 0;
    for (const auto& p : parts) {
        if (p.feature_names != out.feature_names) throw DataError("recordings disagree on feature columns");
        rows += p.size();
    }
    const std::size_t cols = out.feature_names.size();
    std::vector<double> data;
    data.reserve(rows * cols);
    for (const auto& p : parts) {
        data.insert(data.end(), p.features.data().begin(), p.features.data().end());
        out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
    }
    out.features = Matrix(rows, cols, std::move(data));
    return out;
}

std::vector<std::string> recording_files(const std::string& path) {
    std::error_code ec;
    if (fs::is_regular_file(path, ec)) return {path};
    if (!fs::is_directory(path, ec)) throw UsageError("data path does not exist: " + path);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw UsageError("no .csv recordings in " + path);
    return files;
}

LabeledDataset load_dataset(const std::string& path, double sample_rate) {
    std::vector<LabeledDataset> parts;
    for (const auto& file : recording_files(path)) {
        try {
            parts.push_back(labeled(ingestion::load_recording_file(file, sample_rate)));
        } catch (const DataError& e) {
            const std::string what = e.what();
            if (what.rfind(file, 0) == 0) throw;
            throw DataError(file + ": " + what);
        }
    }
    return concatenate(parts);
}

std::vector<Label> ModelBundle::predict(const Matrix& raw_features) const {
    return classifier.predict(preprocess::apply_standardizer(standardizer, raw_features));
}

std::string ModelBundle::serialize() const {
    using nlohmann::json;
    json doc = {{"format", "drivepred.model"},
                {"version", 1},
                {"feature_names", feature_names},
                {"standardizer", {{"mean", standardizer.mean}, {"std_dev", standardizer.std_dev}}},
                {"classifier", jsonutil::parse(classifier.serialize())}};
    return doc.dump() + "\n";
}

ModelBundle ModelBundle::deserialize(std::string_view document) {
    const auto doc = jsonutil::parse(document);
    jsonutil::Reader root(doc, "");
    root.expect_format("drivepred.model", 1);
    std::vector<std::string> names;
    auto list = root.array("feature_names");
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& node = list.at(i).node();
        if (!node.is_string()) throw ParseError("feature_names[" + std::to_string(i) + "] must be a string", "feature_names");
        names.push_back(node.get<std::string>());
    }
    auto s = root.object("standardizer");
    preprocess::StandardizationParams params{s.numbers("mean"), s.numbers("std_dev")};
    if (params.mean.size() != names.size() || params.std_dev.size() != names.size()) {
        throw ParseError("standardizer width does not match feature_names", "standardizer");
    }
    auto classifier = classifiers::TrainedClassifier::deserialize(root.object("classifier").node().dump());
    if (classifier.n_features() != names.size()) {
        throw ParseError("classifier width does not match feature_names", "classifier.n_features");
    }
    return ModelBundle{std::move(names), std::move(params), std::move(classifier)};
}

ModelBundle train_bundle(const classifiers::TrainingConfig& config, const LabeledDataset& data) {
    if (data.size() == 0) throw DataError("training set is empty");
    auto params = preprocess::fit_standardizer(data.features);
    auto model = classifiers::fit(config, preprocess::apply_standardizer(params, data.features), data.labels);
    return ModelBundle{data.feature_names, std::move(params), std::move(model)};
}

void check_features(const ModelBundle& bundle, const LabeledDataset& data) {
    if (data.feature_names != bundle.feature_names) {
        std::string expected, got;
        for (const auto& n : bundle.feature_names) expected += (expected.empty() ? "" : ",") + n;
        for (const auto& n : data.feature_names) got += (got.empty() ? "" : ",") + n;
        throw DataError("feature mismatch: model expects [" + expected + "], data has [" + got + "]");
    }
}

CompareResult compare(const LabeledDataset& data, std::uint64_t seed, const CompareOptions& options) {
    if (options.algorithms.empty()) throw UsageError("at least one algorithm is required");
    CompareResult result;
    result.plan = preprocess::make_split(data.size(), seed, options.test_fraction, options.folds);
    const auto& plan = result.plan;

    Matrix features = data.features;
    if (options.fit_on_all) features = preprocess::apply_standardizer(preprocess::fit_standardizer(features), features);

    Matrix train_x = features.select_rows(plan.train_indices);
    Matrix test_x = features.select_rows(plan.test_indices);
    if (!options.fit_on_all) {
        const auto params = preprocess::fit_standardizer(train_x);
        train_x = preprocess::apply_standardizer(params, train_x);
        test_x = preprocess::apply_standardizer(params, test_x);
    }
    const auto train_y = select(data.labels, plan.train_indices);
    const auto test_y = select(data.labels, plan.test_indices);

    evaluation::CVOptions cv_options;
    cv_options.standardize_per_fold = !options.fit_on_all;
    cv_options.exclude_knn = options.exclude_knn_from_cv;

    const std::size_t n = options.algorithms.size();
    result.cv.resize(n, evaluation::CVResult{domain::Algorithm::DecisionTree, {}, {}, {}, {}, {}, 0, false});
    std::vector<std::optional<evaluation::EvaluationReport>> reports(n);
    std::vector<std::string> holdout_errors(n);
    parallel_for(n, [&](std::size_t a) {
        const classifiers::TrainingConfig config(options.algorithms[a], seed);
        result.cv[a] = evaluation::cross_validate(config, features, data.labels, plan, cv_options);
        try {
            const auto model = classifiers::fit(config, train_x, train_y);
            reports[a] = evaluation::evaluate_holdout(model, test_x, test_y);
        } catch (const classifiers::FitError& e) {
            holdout_errors[a] = e.what();
        }
    });

    for (std::size_t a = 0; a < n; ++a) {
        const std::string name(domain::to_string(options.algorithms[a]));
        const auto& cv = result.cv[a];
        for (const auto& f : cv.folds) {
            if (!f.ok) result.warnings.push_back(name + ": fold " + std::to_string(f.fold) + " failed: " + f.diagnostic);
        }
        if (reports[a]) {
            result.holdout.push_back({options.algorithms[a], std::move(*reports[a])});
        } else {
            result.warnings.push_back(name + ": holdout fit failed: " + holdout_errors[a]);
        }
    }
    return result;
}

std::string render_comparison(const CompareResult& result) {
    std::ostringstream out;
    out << "Samples: " << result.plan.size() << " (train " << result.plan.train_indices.size() << ", test "
        << result.plan.test_indices.size() << "), folds: " << result.plan.folds.size() << ", seed: " << result.plan.seed
        << "\n\n";
    out << evaluation::render_cv_table(result.cv) << "\n";
    out << evaluation::render_holdout_table(result.holdout);
    if (!result.warnings.empty()) {
        out << "\n";
        for (const auto& w : result.warnings) out << "warning: " << w << "\n";
    }
    return out.str();
}

domain::Route route_from_recording(const ingestion::RecordingMatrix& rec) {
    using namespace ingestion;
    const auto d = rec.channel_row(kDistanceChannel);
    const auto limit = rec.channel_row(16);
    const auto light = rec.channel_row(18);
    const auto sign = rec.channel_row(19);
    const auto toll = rec.channel_row(22);
    const auto curvature = rec.channel_row(23);
    const auto slope = rec.channel_row(26);
    domain::Route route;
    for (std::size_t t = 0; t < rec.samples(); ++t) {
        if (!route.samples.empty() && !(d[t] > route.samples.back().distance)) continue;
        const std::array<double, 7> cells{d[t], limit[t], light[t], sign[t], toll[t], curvature[t], slope[t]};
        if (std::any_of(cells.begin(), cells.end(), is_missing)) continue;
        domain::RoutePoint p;
        p.distance = d[t];
        p.speed_limit = limit[t];
        p.traffic_light_index = static_cast<int>(light[t]);
        p.traffic_sign_index = static_cast<int>(sign[t]);
        p.toll_booth = toll[t] != 0.0;
        p.curvature = curvature[t];
        p.slope = slope[t];
        route.samples.push_back(p);
    }
    if (route.samples.empty()) throw DataError("recording has no complete route samples");
    route.length = route.samples.back().distance;
    return route;
}

std::vector<double> speed_at_distances(const std::vector<double>& trace_distance, const std::vector<double>& trace_speed,
                                       const std::vector<double>& distances) {
    if (trace_distance.size() != trace_speed.size() || trace_distance.empty()) {
        throw DataError("trace distance and speed must be nonempty and of equal length");
    }
    std::vector<double> out;
    out.reserve(distances.size());
    for (double d : distances) {
        auto it = std::lower_bound(trace_distance.begin(), trace_distance.end(), d);
        if (it == trace_distance.end()) {
            out.push_back(trace_speed.back());
            continue;
        }
        const auto j = static_cast<std::size_t>(it - trace_distance.begin());
        if (j == 0 || trace_distance[j] == d) {
            out.push_back(trace_speed[j]);
            continue;
        }
        const double f = (d - trace_distance[j - 1]) / (trace_distance[j] - trace_distance[j - 1]);
        out.push_back(trace_speed[j - 1] + f * (trace_speed[j] - trace_speed[j - 1]));
    }
    return out;
}

std::string render_profiles(const ProfileComparison& p) {
    const bool predicted = !p.predicted.empty();
    std::ostringstream out;
    out << "distance\trecorded\trule_based";
    if (predicted) out << "\tpredicted";
    out << "\n";
    char buf[64];
    for (std::size_t i = 0; i < p.distance.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.2f\t%.3f\t%.3f", p.distance[i], p.recorded[i], p.rule_based[i]);
        out << buf;
        if (predicted) {
            std::snprintf(buf, sizeof buf, "\t%.1f", p.predicted[i]);
            out << buf;
        }
        out << "\n";
    }
    auto line = [&](const char* name, const std::vector<double>& a, const std::vector<double>& b) {
        std::snprintf(buf, sizeof buf, "# rmse %s %.4f\n", name, rmse(a, b));
        out << buf;
    };
    line("recorded/rule_based", p.recorded, p.rule_based);
    if (predicted) {
        line("recorded/predicted", p.recorded, p.predicted);
        line("rule_based/predicted", p.rule_based, p.predicted);
    }
    return out.str();
}

double class_midpoint(Label c) { return preprocess::kSpeedBinWidth * c + preprocess::kSpeedBinWidth / 2.0; }

double rmse(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw DataError("profiles differ in length: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    if (a.empty()) return 0.0;
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(ss / static_cast<double>(a.size()));
}

}  // namespace drivepred::pipeline
