#include "knnad/kmeans.hpp"

#include "knnad/distance.hpp"
#include "knnad/error.hpp"
#include "knnad/parallel.hpp"
#include "knnad/random.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace knnad {

namespace {

void update_min_distances(const EmbeddingMatrix& train, std::span<const float> centroid,
                          std::vector<double>& min_d2, unsigned threads) {
    parallel_for(train.count(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            min_d2[i] = std::min(min_d2[i], squared_l2(train.row(i), centroid));
        }
    });
}

// k-means++ seeding: each further center drawn with probability
// proportional to squared distance from the nearest chosen center.
std::vector<std::size_t> kmeanspp_init(const EmbeddingMatrix& train, std::size_t c, Rng& rng,
                                       unsigned threads) {
    const std::size_t n = train.count();
    std::vector<std::size_t> chosen;
    std::vector<bool> taken(n, false);
    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());

    chosen.push_back(rng.uniform_index(n));
    taken[chosen.back()] = true;
    update_min_distances(train, train.row(chosen.back()), min_d2, threads);

    while (chosen.size() < c) {
        double total = 0.0;
        for (double d : min_d2) {
            total += d;
        }
        std::size_t pick = n;
        if (total > 0.0) {
            double target = rng.uniform01() * total;
            double cum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (min_d2[i] <= 0.0) {
                    continue;
                }
                cum += min_d2[i];
                pick = i;
                if (cum > target) {
                    break;
                }
            }
        } else {
            // Fewer distinct points than clusters: duplicate centers.
            pick = static_cast<std::size_t>(std::find(taken.begin(), taken.end(), false) - taken.begin());
        }
        chosen.push_back(pick);
        taken[pick] = true;
        update_min_distances(train, train.row(pick), min_d2, threads);
    }
    return chosen;
}

struct Assignment {
    std::vector<std::size_t> cluster;
    std::vector<double> distance;
    double inertia = 0.0;
};

Assignment assign(const EmbeddingMatrix& centroids, const EmbeddingMatrix& train, unsigned threads) {
    NeighborTable nn = knn_search(centroids, train, 1, threads);
    Assignment a;
    a.cluster.reserve(train.count());
    a.distance.reserve(train.count());
    for (const Neighbor& nb : nn.entries) {
        a.cluster.push_back(nb.index);
        a.distance.push_back(nb.distance);
        a.inertia += nb.distance;
    }
    return a;
}

EmbeddingMatrix update_centroids(const EmbeddingMatrix& train, const EmbeddingMatrix& old, Assignment a) {
    const std::size_t c = old.count();
    const std::size_t dim = train.dim();
    std::vector<double> sums(c * dim, 0.0);
    std::vector<std::size_t> sizes(c, 0);
    for (std::size_t i = 0; i < train.count(); ++i) {
        auto row = train.row(i);
        double* dst = sums.data() + a.cluster[i] * dim;
        for (std::size_t d = 0; d < dim; ++d) {
            dst[d] += row[d];
        }
        ++sizes[a.cluster[i]];
    }

    std::vector<float> out(c * dim);
    for (std::size_t j = 0; j < c; ++j) {
        if (sizes[j] == 0) {
            // Re-seed at the worst-served point; lowest index on ties.
            auto far = std::max_element(a.distance.begin(), a.distance.end());
            std::size_t p = static_cast<std::size_t>(far - a.distance.begin());
            a.distance[p] = -1.0;
            auto row = train.row(p);
            std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(j * dim));
            continue;
        }
        for (std::size_t d = 0; d < dim; ++d) {
            out[j * dim + d] = static_cast<float>(sums[j * dim + d] / static_cast<double>(sizes[j]));
        }
    }
    return EmbeddingMatrix(c, dim, std::move(out));
}

}  // namespace

KMeansCodebook KMeansCodebook::from_centroids(EmbeddingMatrix centroids) {
    if (centroids.empty()) {
        throw SizeError("codebook needs at least one centroid");
    }
    KMeansCodebook cb;
    cb.centroids = std::move(centroids);
    return cb;
}

KMeansCodebook kmeans_fit(const EmbeddingMatrix& train, const KMeansParams& params) {
    if (params.clusters == 0 || params.clusters > train.count()) {
        throw ParameterError("cluster count " + std::to_string(params.clusters) + " must be in [1, " +
                             std::to_string(train.count()) + "]");
    }
    if (params.max_iters == 0) {
        throw ParameterError("max_iters must be >= 1");
    }

    Rng rng(params.seed);
    auto seeds = kmeanspp_init(train, params.clusters, rng, params.threads);

    KMeansCodebook cb;
    cb.seed = params.seed;
    cb.centroids = train.select_rows(seeds);
    Assignment current = assign(cb.centroids, train, params.threads);
    cb.inertia_trace.push_back(current.inertia);

    for (std::size_t it = 1; it <= params.max_iters; ++it) {
        EmbeddingMatrix next = update_centroids(train, cb.centroids, current);
        Assignment reassigned = assign(next, train, params.threads);
        const double prev = current.inertia;
        if (reassigned.inertia > prev) {
            break;
        }
        cb.centroids = std::move(next);
        current = std::move(reassigned);
        cb.inertia_trace.push_back(current.inertia);
        cb.iterations_run = it;
        if (prev == 0.0 || (prev - current.inertia) / prev < params.rel_tol) {
            break;
        }
    }
    cb.inertia = current.inertia;
    return cb;
}

std::vector<std::size_t> kmeans_assign(const EmbeddingMatrix& centroids, const EmbeddingMatrix& points,
                                       unsigned threads) {
    return assign(centroids, points, threads).cluster;
}

ScoreVector codebook_score(const KMeansCodebook& codebook, const EmbeddingMatrix& queries, std::size_t k,
                           unsigned threads) {
    if (k == 0) {
        throw ParameterError("k must be >= 1");
    }
    if (codebook.centroids.dim() != queries.dim()) {
        throw ShapeError("query dim " + std::to_string(queries.dim()) + " != codebook dim " +
                         std::to_string(codebook.centroids.dim()));
    }
    const std::size_t eff_k = std::min(k, codebook.size());
    NeighborTable nn = knn_search(codebook.centroids, queries, eff_k, threads);
    ScoreVector scores;
    scores.reserve(queries.count());
    for (std::size_t q = 0; q < queries.count(); ++q) {
        double sum = 0.0;
        for (const Neighbor& nb : nn.of(q)) {
            sum += nb.distance;
        }
        scores.push_back(sum);
    }
    return scores;
}

}  // namespace knnad
