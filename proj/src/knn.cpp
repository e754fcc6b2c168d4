#include "knnad/knn.hpp"

#include "knnad/distance.hpp"
#include "knnad/error.hpp"
#include "knnad/parallel.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <string>

namespace knnad {

namespace {

// Queries scanned together so each training row is loaded once per block.
constexpr std::size_t kQueryBlock = 8;
constexpr std::size_t kNoSkip = std::numeric_limits<std::size_t>::max();

// Sorted bounded list of the k best (distance, index) pairs. Candidates must
// arrive in ascending index order, which makes "strictly smaller distance"
// the complete tie-break rule.
class TopK {
public:
    TopK() = default;
    TopK(Neighbor* slots, std::size_t k) : slots_(slots), k_(k) {}

    void offer(double distance, std::size_t index) noexcept {
        if (size_ == k_ && !(distance < slots_[k_ - 1].distance)) {
            return;
        }
        std::size_t pos = size_ < k_ ? size_++ : k_ - 1;
        while (pos > 0 && distance < slots_[pos - 1].distance) {
            slots_[pos] = slots_[pos - 1];
            --pos;
        }
        slots_[pos] = Neighbor{distance, index};
    }

private:
    Neighbor* slots_ = nullptr;
    std::size_t k_ = 0;
    std::size_t size_ = 0;
};

// With leave_one_out the queries are the training rows themselves and each
// query skips its own row.
void scan_block(const EmbeddingMatrix& train, const EmbeddingMatrix& queries, std::size_t q_begin,
                std::size_t q_end, std::size_t k, bool leave_one_out, Neighbor* out) {
    const std::size_t dim = train.dim();
    const std::size_t nq = q_end - q_begin;
    std::array<TopK, kQueryBlock> heaps{};
    std::array<const float*, kQueryBlock> qrows{};
    std::array<std::size_t, kQueryBlock> skip{};
    for (std::size_t b = 0; b < nq; ++b) {
        heaps[b] = TopK{out + (q_begin + b) * k, k};
        qrows[b] = queries.row(q_begin + b).data();
        skip[b] = leave_one_out ? q_begin + b : kNoSkip;
    }
    const float* base = train.data().data();
    for (std::size_t j = 0; j < train.count(); ++j) {
        const float* trow = base + j * dim;
        for (std::size_t b = 0; b < nq; ++b) {
            if (j == skip[b]) {
                continue;
            }
            heaps[b].offer(squared_l2(qrows[b], trow, dim), j);
        }
    }
}

NeighborTable search(const EmbeddingMatrix& train, const EmbeddingMatrix& queries, std::size_t k,
                     unsigned threads, bool leave_one_out) {
    NeighborTable table;
    table.k = k;
    table.entries.resize(queries.count() * k);
    std::size_t blocks = (queries.count() + kQueryBlock - 1) / kQueryBlock;
    parallel_for(blocks, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t blk = begin; blk < end; ++blk) {
            std::size_t q0 = blk * kQueryBlock;
            std::size_t q1 = std::min(queries.count(), q0 + kQueryBlock);
            scan_block(train, queries, q0, q1, k, leave_one_out, table.entries.data());
        }
    });
    return table;
}

}  // namespace

NeighborTable knn_search(const EmbeddingMatrix& train, const EmbeddingMatrix& queries, std::size_t k,
                         unsigned threads) {
    if (k == 0) {
        throw ParameterError("k must be >= 1");
    }
    if (k > train.count()) {
        throw ParameterError("k = " + std::to_string(k) + " exceeds training count " +
                             std::to_string(train.count()));
    }
    if (train.dim() != queries.dim()) {
        throw ShapeError("query dim " + std::to_string(queries.dim()) + " != training dim " +
                         std::to_string(train.dim()));
    }
    return search(train, queries, k, threads, false);
}

NeighborTable knn_search_leave_one_out(const EmbeddingMatrix& train, std::size_t k, unsigned threads) {
    if (k == 0) {
        throw ParameterError("k must be >= 1");
    }
    if (k >= train.count()) {
        throw ParameterError("leave-one-out k = " + std::to_string(k) + " must be below training count " +
                             std::to_string(train.count()));
    }
    return search(train, train, k, threads, true);
}

ScoreVector mean_neighbor_distance(const NeighborTable& table) {
    ScoreVector scores;
    if (table.k == 0) {
        return scores;
    }
    std::size_t n = table.entries.size() / table.k;
    scores.reserve(n);
    for (std::size_t q = 0; q < n; ++q) {
        double sum = 0.0;
        for (const Neighbor& nb : table.of(q)) {
            sum += nb.distance;
        }
        scores.push_back(sum / static_cast<double>(table.k));
    }
    return scores;
}

ScoreVector knn_score(const EmbeddingMatrix& train, const EmbeddingMatrix& queries, const KnnParams& params) {
    return mean_neighbor_distance(knn_search(train, queries, params.k, params.threads));
}

}  // namespace knnad
