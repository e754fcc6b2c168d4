#pragma once

#include "knnad/embedding_store.hpp"
#include "knnad/knn.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace knnad {

/// One matrix per group (set) of images; all groups share one dim.
using GroupSet = std::vector<EmbeddingMatrix>;

enum class PoolingMode { mean, max, concat };

std::string_view to_string(PoolingMode mode) noexcept;
std::optional<PoolingMode> parse_pooling_mode(std::string_view name) noexcept;

/// mean/max reduce per dimension (D values) and ignore row order; concat
/// chains rows in the given order (M*D values). Throws SizeError on an
/// empty group.
std::vector<float> pool_group(const EmbeddingMatrix& group, PoolingMode mode);

/// One pooled row per group. Throws SizeError on empty input or empty
/// groups, ShapeError on mixed dims or (for concat) unequal group sizes.
EmbeddingMatrix pool_groupset(const GroupSet& sets, PoolingMode mode);

/// Training-free group score: trace of each group's unbiased sample
/// covariance, i.e. the sum of per-dimension variances with divisor M-1.
/// Throws SizeError if any group has fewer than 2 rows.
ScoreVector covariance_trace_score(const GroupSet& sets);

struct GroupedRows {
    std::vector<Label> group_ids;  // ascending
    GroupSet groups;               // groups[i] holds rows tagged group_ids[i], in file order
};

/// Splits rows by a parallel vector of group ids.
GroupedRows group_rows(const EmbeddingMatrix& rows, const LabelVector& group_ids);

}  // namespace knnad
