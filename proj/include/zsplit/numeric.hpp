#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace zsplit {

/// Numerically stable logistic function. For z = -1e4 the result underflows
/// to exactly 0.0, never NaN; for z = +1e4 it saturates to 1.0.
inline double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// log(1 + e^z) without overflow for large |z|.
inline double softplus(double z) {
    if (z > 0.0) {
        return z + std::log1p(std::exp(-z));
    }
    return std::log1p(std::exp(z));
}

/// Pairwise (cascade) summation. Keeps reduction order fixed regardless of
/// how the terms were produced, and keeps rounding error at O(log n) ulp.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 32) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace zsplit
