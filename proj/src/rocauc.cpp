#include "knnad/rocauc.hpp"

#include "knnad/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace knnad {

double rocauc(std::span<const double> scores, const std::vector<bool>& is_anomalous) {
    const std::size_t n = scores.size();
    if (is_anomalous.size() != n) {
        throw LengthError("score count " + std::to_string(n) + " != label count " +
                          std::to_string(is_anomalous.size()));
    }
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(scores[i])) {
            throw ValidationError("NaN score at index " + std::to_string(i));
        }
        positives += is_anomalous[i] ? 1 : 0;
    }
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0) {
        throw DegenerateInputError("ROCAUC needs at least one anomalous and one normal sample");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Twice the positive rank sum, so midranks stay integral.
    double rank_sum_x2 = 0.0;
    for (std::size_t start = 0; start < n;) {
        std::size_t end = start + 1;
        while (end < n && scores[order[end]] == scores[order[start]]) {
            ++end;
        }
        // 1-based ranks start+1 .. end share the midrank (start + 1 + end) / 2.
        std::size_t pos_in_run = 0;
        for (std::size_t i = start; i < end; ++i) {
            pos_in_run += is_anomalous[order[i]] ? 1 : 0;
        }
        rank_sum_x2 += static_cast<double>(pos_in_run) * static_cast<double>(start + 1 + end);
        start = end;
    }
    const double p = static_cast<double>(positives);
    const double u = rank_sum_x2 / 2.0 - p * (p + 1.0) / 2.0;
    return u / (p * static_cast<double>(negatives));
}

double rocauc(const BinaryLabeledScores& input) {
    return rocauc(input.scores, input.is_anomalous);
}

}  // namespace knnad
