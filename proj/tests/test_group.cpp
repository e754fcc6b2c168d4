#include "knnad/error.hpp"
#include "knnad/group.hpp"
#include "knnad/knn.hpp"
#include "knnad/random.hpp"
#include "support/synthetic.hpp"

#include <doctest.h>

#include <numeric>

using namespace knnad;
using knnad::testing::random_matrix;

namespace {

EmbeddingMatrix permuted(const EmbeddingMatrix& m, Rng& rng) {
    std::vector<std::size_t> order(m.count());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span(order));
    return m.select_rows(order);
}

EmbeddingMatrix shifted(const EmbeddingMatrix& m, float delta) {
    std::vector<float> v(m.data().begin(), m.data().end());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += delta * static_cast<float>(i % m.dim() + 1);
    return EmbeddingMatrix(m.count(), m.dim(), std::move(v));
}

}  // namespace

TEST_CASE("pooling by hand") {
    CHECK(pool_group(EmbeddingMatrix(2, 2, {0, 0, 2, 4}), PoolingMode::mean) == std::vector<float>{1, 2});
    CHECK(pool_group(EmbeddingMatrix(2, 2, {0, 5, 2, 4}), PoolingMode::max) == std::vector<float>{2, 5});
    CHECK(pool_group(EmbeddingMatrix(2, 2, {0, 5, 2, 4}), PoolingMode::concat) == std::vector<float>{0, 5, 2, 4});

    EmbeddingMatrix single(1, 3, {0.1f, -7.0f, 3.3f});
    CHECK(pool_group(single, PoolingMode::mean) == std::vector<float>{0.1f, -7.0f, 3.3f});
    CHECK(pool_group(single, PoolingMode::max) == std::vector<float>{0.1f, -7.0f, 3.3f});

    CHECK_THROWS_AS(pool_group(EmbeddingMatrix(0, 2), PoolingMode::mean), SizeError);
}

TEST_CASE("pool_groupset emits one row per group") {
    GroupSet sets{EmbeddingMatrix(2, 2, {0, 0, 2, 4}), EmbeddingMatrix(2, 2, {0, 5, 2, 4})};
    CHECK(pool_groupset(sets, PoolingMode::mean) == EmbeddingMatrix(2, 2, {1, 2, 1, 4.5f}));
    CHECK(pool_groupset(sets, PoolingMode::max) == EmbeddingMatrix(2, 2, {2, 4, 2, 5}));
    CHECK(pool_groupset(sets, PoolingMode::concat).dim() == 4);

    GroupSet uneven{EmbeddingMatrix(2, 2), EmbeddingMatrix(3, 2)};
    CHECK_THROWS_AS(pool_groupset(uneven, PoolingMode::concat), ShapeError);
    CHECK_NOTHROW(pool_groupset(uneven, PoolingMode::mean));

    GroupSet mixed_dims{EmbeddingMatrix(2, 2), EmbeddingMatrix(2, 3)};
    CHECK_THROWS_AS(pool_groupset(mixed_dims, PoolingMode::mean), ShapeError);
    CHECK_THROWS_AS(pool_groupset(GroupSet{}, PoolingMode::mean), SizeError);
}

TEST_CASE("orderless pooling ignores member order, concat does not") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        auto g = random_matrix(5, 6, rng);
        auto p = permuted(g, rng);
        CHECK(pool_group(g, PoolingMode::max) == pool_group(p, PoolingMode::max));
        auto mean_a = pool_group(g, PoolingMode::mean);
        auto mean_b = pool_group(p, PoolingMode::mean);
        for (std::size_t d = 0; d < mean_a.size(); ++d) {
            CHECK(mean_a[d] == doctest::Approx(mean_b[d]).epsilon(1e-6));
        }
    }
    EmbeddingMatrix g(2, 2, {0, 1, 2, 3});
    EmbeddingMatrix swapped(2, 2, {2, 3, 0, 1});
    CHECK(pool_group(g, PoolingMode::concat) != pool_group(swapped, PoolingMode::concat));
}

TEST_CASE("mean pooling of singleton groups reproduces per-image kNN") {
    Rng rng(8);
    auto train = random_matrix(50, 7, rng);
    auto queries = random_matrix(20, 7, rng);
    GroupSet train_sets, query_sets;
    for (std::size_t i = 0; i < train.count(); ++i) train_sets.push_back(train.select_rows(std::vector{i}));
    for (std::size_t i = 0; i < queries.count(); ++i) query_sets.push_back(queries.select_rows(std::vector{i}));
    auto pooled = knn_score(pool_groupset(train_sets, PoolingMode::mean), pool_groupset(query_sets, PoolingMode::mean));
    CHECK(pooled == knn_score(train, queries));
}

TEST_CASE("covariance trace by hand") {
    GroupSet sets{EmbeddingMatrix(3, 2, std::vector<float>(6, 4.0f)), EmbeddingMatrix(2, 2, {0, 0, 2, 0})};
    CHECK(covariance_trace_score(sets) == std::vector<double>{0.0, 2.0});
    CHECK_THROWS_AS(covariance_trace_score(GroupSet{EmbeddingMatrix(1, 2, {1, 1})}), SizeError);
}

TEST_CASE("covariance trace is invariant to member order and translation") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        auto g = random_matrix(2 + rng.uniform_index(30), 5, rng);
        double base = covariance_trace_score(GroupSet{g})[0];
        CHECK(covariance_trace_score(GroupSet{permuted(g, rng)})[0] == doctest::Approx(base).epsilon(1e-9));
        CHECK(covariance_trace_score(GroupSet{shifted(g, 0.5f)})[0] == doctest::Approx(base).epsilon(1e-6));
    }
}

TEST_CASE("rows split by group id") {
    EmbeddingMatrix rows(5, 1, {0, 1, 2, 3, 4});
    auto g = group_rows(rows, LabelVector{7, 3, 7, 3, 9});
    CHECK(g.group_ids == std::vector<Label>{3, 7, 9});
    REQUIRE(g.groups.size() == 3);
    CHECK(g.groups[0] == EmbeddingMatrix(2, 1, {1, 3}));
    CHECK(g.groups[1] == EmbeddingMatrix(2, 1, {0, 2}));
    CHECK(g.groups[2] == EmbeddingMatrix(1, 1, {4}));
    CHECK_THROWS_AS(group_rows(rows, LabelVector{1, 2}), LengthError);
}

TEST_CASE("pooling mode names") {
    for (auto mode : {PoolingMode::mean, PoolingMode::max, PoolingMode::concat}) {
        CHECK(parse_pooling_mode(to_string(mode)) == mode);
    }
    CHECK_FALSE(parse_pooling_mode("sum").has_value());
}
