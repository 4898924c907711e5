#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "drivepred/common.hpp"

namespace drivepred::preprocess {

enum class StdConvention {
    Population,  // divide by N
    Sample,      // divide by N - 1
};

/// Per-column location and scale for z-scoring.
struct StandardizationParams {
    std::vector<double> mean;
    std::vector<double> std_dev;

    std::size_t features() const { return mean.size(); }
    friend bool operator==(const StandardizationParams&, const StandardizationParams&) = default;
};

StandardizationParams fit_standardizer(const Matrix& features,
                                       StdConvention convention = StdConvention::Population);

/// z = (x - mean) / std; columns with zero spread map to 0.
Matrix apply_standardizer(const StandardizationParams& params, const Matrix& features);

inline constexpr Label kMaxSpeedClass = 14;
inline constexpr double kSpeedBinWidth = 10.0;  // km/h

/// floor(speed / 10) clipped to [0, 14]. Throws DataError for negative or
/// non-finite speeds.
Label discretize_speed(double speed_kmh);
std::vector<Label> discretize_speed(const std::vector<double>& speeds_kmh);

/// Shuffled holdout split plus a fold partition of the training indices.
struct SplitPlan {
    std::uint64_t seed = 0;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    std::vector<std::vector<std::size_t>> folds;

    std::size_t size() const { return train_indices.size() + test_indices.size(); }
    /// Training indices outside fold k.
    std::vector<std::size_t> fold_complement(std::size_t k) const;

    friend bool operator==(const SplitPlan&, const SplitPlan&) = default;
};

inline constexpr double kDefaultTestFraction = 0.10;
inline constexpr std::size_t kDefaultFolds = 5;

/// Shuffles 0..n-1 with Rng(seed) (Fisher-Yates over std::mt19937_64), sends
/// the last round(test_fraction * n) to test and cuts the rest into
/// `folds` contiguous blocks whose sizes differ by at most one.
SplitPlan make_split(std::size_t n, std::uint64_t seed, double test_fraction = kDefaultTestFraction,
                     std::size_t folds = kDefaultFolds);

/// Throws DataError describing the first broken SplitPlan invariant.
void check_split(const SplitPlan& plan, double test_fraction = kDefaultTestFraction);

std::string serialize_split(const SplitPlan& plan);
SplitPlan deserialize_split(std::string_view document);

}  // namespace drivepred::preprocess
