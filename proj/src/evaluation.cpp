#include "drivepred/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "json_util.hpp"

namespace drivepred::evaluation {

ConfusionMatrix::ConfusionMatrix(std::vector<Label> class_list, std::vector<std::vector<std::int64_t>> counts)
    : classes_(std::move(class_list)), counts_(std::move(counts)) {
    if (counts_.size() != classes_.size()) throw DataError("confusion matrix must be K x K");
    if (!std::is_sorted(classes_.begin(), classes_.end()) ||
        std::adjacent_find(classes_.begin(), classes_.end()) != classes_.end()) {
        throw DataError("confusion matrix classes must be sorted and unique");
    }
    for (const auto& row : counts_) {
        if (row.size() != classes_.size()) throw DataError("confusion matrix must be K x K");
        for (auto c : row) {
            if (c < 0) throw DataError("confusion counts must be non-negative");
            total_ += c;
        }
    }
}

std::int64_t ConfusionMatrix::fp(std::size_t k) const {
    std::int64_t col = 0;
    for (const auto& row : counts_) col += row[k];
    return col - tp(k);
}

std::int64_t ConfusionMatrix::fn(std::size_t k) const {
    std::int64_t row = 0;
    for (auto c : counts_[k]) row += c;
    return row - tp(k);
}

ConfusionMatrix confusion_matrix(const std::vector<Label>& y_true, const std::vector<Label>& y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw DataError("label vectors differ in length: " + std::to_string(y_true.size()) + " vs " +
                        std::to_string(y_pred.size()));
    }
    if (y_true.empty()) throw DataError("cannot build a confusion matrix from no samples");
    std::set<Label> all(y_true.begin(), y_true.end());
    all.insert(y_pred.begin(), y_pred.end());
    std::vector<Label> classes(all.begin(), all.end());
    auto index = [&](Label l) {
        return static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), l) - classes.begin());
    };
    std::vector<std::vector<std::int64_t>> counts(classes.size(), std::vector<std::int64_t>(classes.size(), 0));
    for (std::size_t i = 0; i < y_true.size(); ++i) counts[index(y_true[i])][index(y_pred[i])] += 1;
    return ConfusionMatrix(std::move(classes), std::move(counts));
}

std::vector<ClassMetrics> class_metrics(const ConfusionMatrix& cm) {
    std::vector<ClassMetrics> out;
    for (std::size_t k = 0; k < cm.size(); ++k) {
        ClassMetrics m;
        m.label = cm.class_list()[k];
        const auto tp = static_cast<double>(cm.tp(k));
        const auto pd = static_cast<double>(cm.tp(k) + cm.fp(k));
        const auto rd = static_cast<double>(cm.tp(k) + cm.fn(k));
        m.precision = pd > 0 ? tp / pd : 0.0;
        m.recall = rd > 0 ? tp / rd : 0.0;
        m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        m.support = cm.support(k);
        m.zero_division = pd == 0 || rd == 0;
        out.push_back(m);
    }
    return out;
}

double accuracy(const ConfusionMatrix& cm) {
    if (cm.total() == 0) return 0.0;
    std::int64_t trace = 0;
    for (std::size_t k = 0; k < cm.size(); ++k) trace += cm.tp(k);
    return static_cast<double>(trace) / static_cast<double>(cm.total());
}

WeightedMetrics weighted_average(const std::vector<ClassMetrics>& per_class) {
    WeightedMetrics w;
    for (const auto& m : per_class) {
        if (m.support < 0) throw DataError("supports must be non-negative");
        const auto s = static_cast<double>(m.support);
        w.precision += s * m.precision;
        w.recall += s * m.recall;
        w.f1 += s * m.f1;
        w.support += m.support;
    }
    if (w.support == 0) throw DataError("weighted average needs at least one class with nonzero support");
    const auto total = static_cast<double>(w.support);
    w.precision /= total;
    w.recall /= total;
    w.f1 /= total;
    return w;
}

EvaluationReport evaluate(const std::vector<Label>& y_true, const std::vector<Label>& y_pred) {
    const auto cm = confusion_matrix(y_true, y_pred);
    EvaluationReport r;
    r.per_class = class_metrics(cm);
    r.accuracy = accuracy(cm);
    r.weighted = weighted_average(r.per_class);
    r.total_support = cm.total();
    r.zero_division_count = static_cast<std::size_t>(
        std::count_if(r.per_class.begin(), r.per_class.end(), [](const ClassMetrics& m) { return m.zero_division; }));
    return r;
}

EvaluationReport evaluate_holdout(const classifiers::TrainedClassifier& model, const Matrix& features,
                                  const std::vector<Label>& labels) {
    if (features.rows() == 0) throw DataError("holdout set is empty");
    return evaluate(labels, model.predict(features));
}

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd out;
    if (values.empty()) return out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size()));
    return out;
}

CVResult cross_validate(const classifiers::TrainingConfig& config, const Matrix& features,
                        const std::vector<Label>& labels, const preprocess::SplitPlan& plan, const CVOptions& options) {
    if (labels.size() != features.rows()) throw DataError("label count does not match row count");
    if (plan.size() != features.rows()) throw DataError("split plan does not cover the dataset");
    CVResult result{config.algorithm(), {}, {}, {}, {}, {}, 0, false};
    if (options.exclude_knn && config.algorithm() == domain::Algorithm::KNNeighbors) {
        result.skipped = true;
        return result;
    }

    result.folds.resize(plan.folds.size());
    for (std::size_t k = 0; k < plan.folds.size(); ++k) {
        FoldResult& fr = result.folds[k];
        fr.fold = k;
        const auto train_idx = plan.fold_complement(k);
        const auto& val_idx = plan.folds[k];
        Matrix train_x = features.select_rows(train_idx);
        Matrix val_x = features.select_rows(val_idx);
        if (options.standardize_per_fold) {
            const auto params = preprocess::fit_standardizer(train_x);
            train_x = preprocess::apply_standardizer(params, train_x);
            val_x = preprocess::apply_standardizer(params, val_x);
        }
        try {
            const auto model = classifiers::fit(config, train_x, select(labels, train_idx));
            const auto report = evaluate_holdout(model, val_x, select(labels, val_idx));
            fr.ok = true;
            fr.precision = report.weighted.precision;
            fr.recall = report.weighted.recall;
            fr.f1 = report.weighted.f1;
            fr.accuracy = report.accuracy;
        } catch (const classifiers::FitError& e) {
            fr.diagnostic = e.what();
            result.failed_folds += 1;
        }
    }

    std::vector<double> p, r, f, a;
    for (const auto& fr : result.folds) {
        if (!fr.ok) continue;
        p.push_back(fr.precision);
        r.push_back(fr.recall);
        f.push_back(fr.f1);
        a.push_back(fr.accuracy);
    }
    result.precision = mean_std(p);
    result.recall = mean_std(r);
    result.f1 = mean_std(f);
    result.accuracy = mean_std(a);
    return result;
}

namespace {

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string pad_right(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }
std::string pad_left(const std::string& s, std::size_t w) { return s.size() >= w ? s : std::string(w - s.size(), ' ') + s; }

}  // namespace

std::string render_class_table(const EvaluationReport& report, const std::string& title) {
    std::ostringstream out;
    out << title << "\n";
    const std::size_t w0 = 14;
    const std::size_t w = 11;
    out << pad_right("Class", w0) << pad_left("Precision", w) << pad_left("Recall", w) << pad_left("F1-score", w)
        << pad_left("Support", w) << "\n";
    for (const auto& m : report.per_class) {
        out << pad_right(std::to_string(m.label), w0) << pad_left(fixed2(m.precision), w) << pad_left(fixed2(m.recall), w)
            << pad_left(fixed2(m.f1), w) << pad_left(std::to_string(m.support), w) << "\n";
    }
    out << "\n";
    out << pad_right("Accuracy", w0) << pad_left("", w) << pad_left("", w) << pad_left(fixed2(report.accuracy), w)
        << pad_left(std::to_string(report.total_support), w) << "\n";
    out << pad_right("Weighted AVG", w0) << pad_left(fixed2(report.weighted.precision), w)
        << pad_left(fixed2(report.weighted.recall), w) << pad_left(fixed2(report.weighted.f1), w)
        << pad_left(std::to_string(report.weighted.support), w) << "\n";
    if (report.zero_division_count > 0) {
        out << "note: " << report.zero_division_count << " class(es) had a zero denominator; those metrics are 0\n";
    }
    return out.str();
}

std::string render_cv_table(const std::vector<CVResult>& results) {
    std::vector<const CVResult*> shown;
    for (const auto& r : results) {
        if (!r.skipped) shown.push_back(&r);
    }
    const std::size_t w0 = 20;
    const std::size_t half = 10;
    std::ostringstream out;
    out << "Cross validation results (weighted metrics over folds)\n";
    out << pad_right("", w0);
    for (const auto* r : shown) out << pad_left(std::string(domain::to_string(r->algorithm)), 2 * half);
    out << "\n" << pad_right("", w0);
    for (std::size_t i = 0; i < shown.size(); ++i) out << pad_left("AVG", half) << pad_left("STD", half);
    out << "\n";
    auto row = [&](const std::string& name, MeanStd CVResult::*field) {
        out << pad_right(name, w0);
        for (const auto* r : shown) {
            if (r->all_failed()) {
                out << pad_left("n/a", half) << pad_left("n/a", half);
            } else {
                out << pad_left(fixed2((r->*field).mean), half) << pad_left(fixed2((r->*field).std), half);
            }
        }
        out << "\n";
    };
    row("Weighted Precision", &CVResult::precision);
    row("Weighted Recall", &CVResult::recall);
    row("Weighted F1-Score", &CVResult::f1);
    row("Weighted Accuracy", &CVResult::accuracy);
    for (const auto& r : results) {
        if (r.skipped) out << "note: " << domain::to_string(r.algorithm) << " excluded from validation\n";
        if (r.failed_folds > 0) {
            out << "note: " << domain::to_string(r.algorithm) << " failed on " << r.failed_folds
                << " fold(s); statistics use the remaining folds\n";
        }
    }
    return out.str();
}

std::string render_holdout_table(const std::vector<HoldoutColumn>& columns) {
    const std::size_t w0 = 24;
    const std::size_t w = 20;
    std::ostringstream out;
    out << "Holdout results (weighted averages)\n" << pad_right("", w0);
    for (const auto& c : columns) out << pad_left(std::string(domain::to_string(c.algorithm)), w);
    out << "\n";
    auto row = [&](const std::string& name, double WeightedMetrics::*field) {
        out << pad_right(name, w0);
        for (const auto& c : columns) out << pad_left(fixed2(c.report.weighted.*field), w);
        out << "\n";
    };
    row("Weighted AVG Precision", &WeightedMetrics::precision);
    row("Weighted AVG Recall", &WeightedMetrics::recall);
    row("Weighted AVG F1-Score", &WeightedMetrics::f1);
    out << pad_right("Accuracy", w0);
    for (const auto& c : columns) out << pad_left(fixed2(c.report.accuracy), w);
    out << "\n";
    return out.str();
}

namespace {

using nlohmann::json;

json report_json(const EvaluationReport& r) {
    json per_class = json::array();
    for (const auto& m : r.per_class) {
        per_class.push_back({{"label", m.label},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"support", m.support}});
    }
    return {{"per_class", std::move(per_class)},
            {"accuracy", r.accuracy},
            {"weighted",
             {{"precision", r.weighted.precision},
              {"recall", r.weighted.recall},
              {"f1", r.weighted.f1},
              {"support", r.weighted.support}}},
            {"total_support", r.total_support},
            {"zero_division_count", r.zero_division_count}};
}

json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

}  // namespace

std::string report_document(const EvaluationReport& report) {
    json doc = report_json(report);
    doc["format"] = "drivepred.evaluation_report";
    doc["version"] = 1;
    return doc.dump(2) + "\n";
}

std::string comparison_document(const std::vector<CVResult>& cv, const std::vector<HoldoutColumn>& holdout,
                                std::uint64_t seed) {
    json cv_json = json::array();
    for (const auto& r : cv) {
        json folds = json::array();
        for (const auto& f : r.folds) {
            json fj = {{"fold", f.fold}, {"ok", f.ok}};
            if (f.ok) {
                fj["precision"] = f.precision;
                fj["recall"] = f.recall;
                fj["f1"] = f.f1;
                fj["accuracy"] = f.accuracy;
            } else {
                fj["diagnostic"] = f.diagnostic;
            }
            folds.push_back(std::move(fj));
        }
        json entry = {{"algorithm", domain::to_string(r.algorithm)}, {"skipped", r.skipped}, {"folds", std::move(folds)}};
        if (!r.skipped && !r.all_failed()) {
            entry["precision"] = mean_std_json(r.precision);
            entry["recall"] = mean_std_json(r.recall);
            entry["f1"] = mean_std_json(r.f1);
            entry["accuracy"] = mean_std_json(r.accuracy);
        }
        cv_json.push_back(std::move(entry));
    }
    json holdout_json = json::array();
    for (const auto& c : holdout) {
        holdout_json.push_back({{"algorithm", domain::to_string(c.algorithm)}, {"report", report_json(c.report)}});
    }
    json doc = {{"format", "drivepred.comparison"},
                {"version", 1},
                {"seed", seed},
                {"cross_validation", std::move(cv_json)},
                {"holdout", std::move(holdout_json)}};
    return doc.dump(2) + "\n";
}

}  // namespace drivepred::evaluation
