#include "knnad/cleaning.hpp"

#include "knnad/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace knnad {

CleaningResult clean_training_set(const EmbeddingMatrix& train, const CleaningParams& params) {
    const std::size_t n = train.count();
    if (n < 2) {
        throw SizeError("cleaning needs at least 2 training rows, got " + std::to_string(n));
    }
    if (!(params.removal_fraction >= 0.0 && params.removal_fraction < 1.0)) {
        throw ParameterError("removal fraction must be in [0, 1)");
    }
    if (params.k == 0 || params.k >= n) {
        throw ParameterError("cleaning k = " + std::to_string(params.k) + " must be in [1, " +
                             std::to_string(n - 1) + "]");
    }

    CleaningResult result;
    result.scores = mean_neighbor_distance(knn_search_leave_one_out(train, params.k, params.threads));

    const auto n_remove = static_cast<std::size_t>(std::floor(params.removal_fraction * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // Most anomalous first; equal scores put the higher index first.
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (result.scores[a] != result.scores[b]) {
            return result.scores[a] > result.scores[b];
        }
        return a > b;
    });

    std::vector<bool> removed(n, false);
    for (std::size_t i = 0; i < n_remove; ++i) {
        removed[order[i]] = true;
    }
    for (std::size_t i = 0; i < n; ++i) {
        (removed[i] ? result.removed_indices : result.kept_indices).push_back(i);
    }
    result.kept = train.select_rows(result.kept_indices);
    return result;
}

}  // namespace knnad
