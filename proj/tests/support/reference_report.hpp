#pragma once

// Per-class rows of a reference RandomForest classification report over the
// 15 speed classes (two-decimal values as printed).

#include <array>
#include <cstdint>

namespace reference {

struct Row {
    int label;
    double precision;
    double recall;
    double f1;
    std::int64_t support;
};

inline constexpr std::array<Row, 15> kRows{{
    {0, 0.99, 0.99, 0.99, 8134},
    {1, 0.94, 0.93, 0.93, 2498},
    {2, 0.91, 0.90, 0.91, 4556},
    {3, 0.90, 0.90, 0.90, 5984},
    {4, 0.88, 0.90, 0.89, 7053},
    {5, 0.88, 0.87, 0.88, 5339},
    {6, 0.92, 0.92, 0.92, 3786},
    {7, 0.93, 0.92, 0.92, 3072},
    {8, 0.95, 0.93, 0.94, 2283},
    {9, 0.93, 0.93, 0.93, 1511},
    {10, 0.94, 0.96, 0.95, 1646},
    {11, 0.84, 0.81, 0.83, 499},
    {12, 0.78, 0.79, 0.79, 285},
    {13, 0.88, 0.82, 0.85, 222},
    {14, 0.64, 0.47, 0.54, 15},
}};

inline constexpr std::int64_t kTotalSupport = 46883;
inline constexpr double kWeighted = 0.92;

}  // namespace reference
