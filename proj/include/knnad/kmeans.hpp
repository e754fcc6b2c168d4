#pragma once

#include "knnad/embedding_store.hpp"
#include "knnad/knn.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace knnad {

/// C x D set of centroids standing in for a training set at scoring time.
struct KMeansCodebook {
    EmbeddingMatrix centroids;
    /// Sum of squared point-to-assigned-centroid distances after the last
    /// accepted iteration.
    double inertia = 0.0;
    std::size_t iterations_run = 0;
    std::uint64_t seed = 0;
    /// Inertia after initialization and after every accepted Lloyd step;
    /// monotone non-increasing.
    std::vector<double> inertia_trace;

    std::size_t size() const noexcept { return centroids.count(); }

    /// Codebook whose centroids are given verbatim (no fitting).
    static KMeansCodebook from_centroids(EmbeddingMatrix centroids);
};

struct KMeansParams {
    std::size_t clusters = 1;
    std::uint64_t seed = 0;
    std::size_t max_iters = 100;
    double rel_tol = 1e-6;
    unsigned threads = 0;
};

/// Lloyd's algorithm from a seeded k-means++ start.
///
/// Stops when the relative inertia improvement drops below `rel_tol` or
/// after `max_iters` update steps. A cluster left empty by an assignment is
/// re-seeded at the point farthest from its assigned centroid. If floating
/// point rounding makes a step increase inertia, the step is rejected and
/// fitting stops, so the recorded trace is always non-increasing.
///
/// Throws ParameterError unless 1 <= clusters <= train.count() and
/// max_iters >= 1.
KMeansCodebook kmeans_fit(const EmbeddingMatrix& train, const KMeansParams& params);

/// Index of the nearest centroid for every point (lowest index on ties).
std::vector<std::size_t> kmeans_assign(const EmbeddingMatrix& centroids, const EmbeddingMatrix& points,
                                       unsigned threads = 0);

/// Sum (not mean) of squared distances from each query to its min(k, C)
/// nearest centroids. Clamping keeps C = 1 meaningful as the distance to the
/// single centroid. Ranking matches a mean-based score exactly.
ScoreVector codebook_score(const KMeansCodebook& codebook, const EmbeddingMatrix& queries,
                           std::size_t k = kDefaultK, unsigned threads = 0);

}  // namespace knnad
