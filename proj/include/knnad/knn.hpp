#pragma once

#include "knnad/embedding_store.hpp"

#include <cstddef>
#include <vector>

namespace knnad {

/// Per-query anomaly scores; higher means more anomalous.
using ScoreVector = std::vector<double>;

/// Default neighbor count; small k works best on deep features.
inline constexpr std::size_t kDefaultK = 2;

struct KnnParams {
    std::size_t k = kDefaultK;
    /// Worker cap for query-parallel scans; 0 = hardware concurrency.
    unsigned threads = 0;
};

struct Neighbor {
    double distance;  // squared Euclidean
    std::size_t index;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// k nearest neighbors of every query row, flattened query-major: entries
/// [q*k, q*k + k) are query q's neighbors by ascending (distance, index).
struct NeighborTable {
    std::size_t k = 0;
    std::vector<Neighbor> entries;

    std::span<const Neighbor> of(std::size_t query) const noexcept {
        return {entries.data() + query * k, k};
    }
};

/// Exact brute-force kNN. Equal distances resolve to the lower training
/// index. Throws ParameterError if k is 0 or exceeds train.count(),
/// ShapeError on dim mismatch.
NeighborTable knn_search(const EmbeddingMatrix& train, const EmbeddingMatrix& queries, std::size_t k,
                         unsigned threads = 0);

/// Leave-one-out kNN of each training row against all other training rows.
/// Requires k < train.count().
NeighborTable knn_search_leave_one_out(const EmbeddingMatrix& train, std::size_t k, unsigned threads = 0);

/// Mean squared distance from each query to its k nearest training rows.
/// Empty queries give an empty result.
ScoreVector knn_score(const EmbeddingMatrix& train, const EmbeddingMatrix& queries, const KnnParams& params = {});

/// Mean of each row of a neighbor table (the kNN score).
ScoreVector mean_neighbor_distance(const NeighborTable& table);

}  // namespace knnad
