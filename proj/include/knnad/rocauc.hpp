#pragma once

#include <span>
#include <vector>

namespace knnad {

struct BinaryLabeledScores {
    std::vector<double> scores;
    std::vector<bool> is_anomalous;
};

/// Area under the ROC curve: P(anomalous score > normal score) with ties
/// counted half, computed from midranks in O(n log n).
///
/// Throws LengthError on mismatched lengths, ValidationError on NaN scores,
/// DegenerateInputError unless both classes are present.
double rocauc(std::span<const double> scores, const std::vector<bool>& is_anomalous);
double rocauc(const BinaryLabeledScores& input);

}  // namespace knnad
