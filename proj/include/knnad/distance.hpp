#pragma once

#include <cstddef>
#include <span>

namespace knnad {

/// Squared Euclidean distance accumulated in double precision.
///
/// Summation order is fixed (four interleaved lanes, then the tail), so the
/// result is a pure function of its inputs. Identical rows give exactly 0.
inline double squared_l2(const float* a, const float* b, std::size_t dim) noexcept {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= dim; i += 4) {
        double d0 = static_cast<double>(a[i]) - b[i];
        double d1 = static_cast<double>(a[i + 1]) - b[i + 1];
        double d2 = static_cast<double>(a[i + 2]) - b[i + 2];
        double d3 = static_cast<double>(a[i + 3]) - b[i + 3];
        s0 += d0 * d0;
        s1 += d1 * d1;
        s2 += d2 * d2;
        s3 += d3 * d3;
    }
    for (; i < dim; ++i) {
        double d = static_cast<double>(a[i]) - b[i];
        s0 += d * d;
    }
    return (s0 + s1) + (s2 + s3);
}

inline double squared_l2(std::span<const float> a, std::span<const float> b) noexcept {
    return squared_l2(a.data(), b.data(), a.size());
}

}  // namespace knnad
