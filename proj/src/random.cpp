#include "knnad/random.hpp"

#include "knnad/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace knnad {

double Rng::normal() {
    double u1 = 0.0;
    while (u1 <= 0.0) {
        u1 = uniform01();
    }
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t count) {
    if (count > n) {
        throw ParameterError("cannot sample " + std::to_string(count) + " of " + std::to_string(n) + " items");
    }
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    // Partial Fisher-Yates over the prefix.
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + uniform_index(n - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace knnad
