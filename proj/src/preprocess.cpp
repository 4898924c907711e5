#include "drivepred/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json_util.hpp"

namespace drivepred::preprocess {

StandardizationParams fit_standardizer(const Matrix& features, StdConvention convention) {
    if (features.rows() == 0) throw DataError("cannot fit a standardizer on an empty matrix");
    const std::size_t n = features.rows();
    const std::size_t f = features.cols();
    StandardizationParams p{std::vector<double>(f, 0.0), std::vector<double>(f, 0.0)};
    for (std::size_t j = 0; j < f; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += features(i, j);
        bool constant = true;
        for (std::size_t i = 1; i < n && constant; ++i) constant = features(i, j) == features(0, j);
        // Rounding in sum / n would otherwise leave a tiny spread on constant columns.
        const double mean = constant ? features(0, j) : sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = features(i, j) - mean;
            ss += d * d;
        }
        double denom = static_cast<double>(n);
        if (convention == StdConvention::Sample) denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
        p.mean[j] = mean;
        p.std_dev[j] = std::sqrt(ss / denom);
    }
    return p;
}

Matrix apply_standardizer(const StandardizationParams& params, const Matrix& features) {
    if (features.cols() != params.features() || params.std_dev.size() != params.mean.size()) {
        throw DataError("standardizer expects " + std::to_string(params.features()) + " features, got " +
                        std::to_string(features.cols()));
    }
    Matrix out(features.rows(), features.cols());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        for (std::size_t j = 0; j < features.cols(); ++j) {
            const double s = params.std_dev[j];
            out(i, j) = s > 0.0 ? (features(i, j) - params.mean[j]) / s : 0.0;
        }
    }
    return out;
}

Label discretize_speed(double speed_kmh) {
    if (!std::isfinite(speed_kmh)) throw DataError("speed must be finite");
    if (speed_kmh < 0.0) throw DataError("negative speed " + std::to_string(speed_kmh) + " km/h");
    const double bin = std::floor(speed_kmh / kSpeedBinWidth);
    return bin >= kMaxSpeedClass ? kMaxSpeedClass : static_cast<Label>(bin);
}

std::vector<Label> discretize_speed(const std::vector<double>& speeds_kmh) {
    std::vector<Label> out(speeds_kmh.size());
    std::transform(speeds_kmh.begin(), speeds_kmh.end(), out.begin(),
                   [](double v) { return discretize_speed(v); });
    return out;
}

std::vector<std::size_t> SplitPlan::fold_complement(std::size_t k) const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < folds.size(); ++j) {
        if (j != k) out.insert(out.end(), folds[j].begin(), folds[j].end());
    }
    return out;
}

namespace {

std::size_t test_count(std::size_t n, double test_fraction) {
    return static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
}

}  // namespace

SplitPlan make_split(std::size_t n, std::uint64_t seed, double test_fraction, std::size_t folds) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw UsageError("test fraction must lie in (0, 1)");
    if (folds < 2) throw UsageError("at least two folds are required");
    if (n < 10) throw DataError("at least 10 samples are required to split, got " + std::to_string(n));
    const std::size_t n_test = test_count(n, test_fraction);
    if (n_test == 0 || n - n_test < folds) {
        throw DataError("too few samples (" + std::to_string(n) + ") for a nonempty test set and " +
                        std::to_string(folds) + " folds");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);

    SplitPlan plan;
    plan.seed = seed;
    const std::size_t n_train = n - n_test;
    plan.train_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    plan.test_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

    const std::size_t base = n_train / folds;
    const std::size_t extra = n_train % folds;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < folds; ++k) {
        const std::size_t len = base + (k < extra ? 1 : 0);
        plan.folds.emplace_back(plan.train_indices.begin() + static_cast<std::ptrdiff_t>(pos),
                                plan.train_indices.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }
    return plan;
}

void check_split(const SplitPlan& plan, double test_fraction) {
    const std::size_t n = plan.size();
    if (plan.test_indices.size() != test_count(n, test_fraction)) throw DataError("test size is not round(fraction * N)");
    std::vector<int> seen(n, 0);
    for (auto i : plan.train_indices) {
        if (i >= n || seen[i]++) throw DataError("train index out of range or repeated");
    }
    for (auto i : plan.test_indices) {
        if (i >= n || seen[i]++) throw DataError("test index out of range or shared with train");
    }
    std::vector<int> in_fold(n, 0);
    std::size_t lo = n;
    std::size_t hi = 0;
    for (const auto& fold : plan.folds) {
        lo = std::min(lo, fold.size());
        hi = std::max(hi, fold.size());
        for (auto i : fold) {
            if (i >= n || in_fold[i]++) throw DataError("fold index out of range or in two folds");
        }
    }
    for (auto i : plan.train_indices) {
        if (!in_fold[i]) throw DataError("train index not covered by any fold");
    }
    for (auto i : plan.test_indices) {
        if (in_fold[i]) throw DataError("test index appears in a fold");
    }
    if (!plan.folds.empty() && hi - lo > 1) throw DataError("fold sizes differ by more than one");
}

std::string serialize_split(const SplitPlan& plan) {
    using nlohmann::json;
    json doc = {{"format", "drivepred.split_plan"},
                {"version", 1},
                {"seed", plan.seed},
                {"train_indices", plan.train_indices},
                {"test_indices", plan.test_indices},
                {"folds", plan.folds}};
    return doc.dump(2) + "\n";
}

SplitPlan deserialize_split(std::string_view document) {
    using jsonutil::Reader;
    const auto doc = jsonutil::parse(document);
    Reader root(doc, "");
    root.expect_format("drivepred.split_plan", 1);
    auto to_indices = [](const std::vector<std::int64_t>& v, const std::string& field) {
        std::vector<std::size_t> out;
        for (auto x : v) {
            if (x < 0) throw ParseError(field + " holds a negative index", field);
            out.push_back(static_cast<std::size_t>(x));
        }
        return out;
    };
    SplitPlan plan;
    plan.seed = root.unsigned_integer("seed");
    plan.train_indices = to_indices(root.integers("train_indices"), "train_indices");
    plan.test_indices = to_indices(root.integers("test_indices"), "test_indices");
    auto folds = root.array("folds");
    for (std::size_t k = 0; k < folds.size(); ++k) {
        auto fold = folds.at(k);
        if (!fold.node().is_array()) throw ParseError(fold.path() + " must be an array", fold.path());
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < fold.node().size(); ++i) {
            auto v = jsonutil::Reader(fold.node()[i], fold.path()).as_integer();
            if (v < 0) throw ParseError(fold.path() + " holds a negative index", fold.path());
            idx.push_back(static_cast<std::size_t>(v));
        }
        plan.folds.push_back(std::move(idx));
    }
    return plan;
}

}  // namespace drivepred::preprocess
