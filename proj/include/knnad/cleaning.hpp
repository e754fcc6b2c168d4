#pragma once

#include "knnad/embedding_store.hpp"
#include "knnad/knn.hpp"

#include <cstddef>
#include <vector>

namespace knnad {

struct CleaningParams {
    /// Fraction of rows to drop, in [0, 1). Should exceed the expected
    /// contamination rate; dropping half is aggressive but cheap since the
    /// scorer needs few clean rows.
    double removal_fraction = 0.5;
    std::size_t k = kDefaultK;
    unsigned threads = 0;
};

struct CleaningResult {
    EmbeddingMatrix kept;
    std::vector<std::size_t> kept_indices;     // ascending
    std::vector<std::size_t> removed_indices;  // ascending
    /// Leave-one-out kNN score of every input row.
    ScoreVector scores;
};

/// Scores every row by its mean squared distance to its k nearest *other*
/// rows and removes the floor(removal_fraction * N) highest-scoring rows.
/// Among equal scores at the cut the higher row index is removed first.
///
/// Throws SizeError when train has fewer than 2 rows and ParameterError when
/// removal_fraction is outside [0, 1) or k >= train.count().
CleaningResult clean_training_set(const EmbeddingMatrix& train, const CleaningParams& params = {});

}  // namespace knnad
