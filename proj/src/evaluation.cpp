#include "knnad/evaluation.hpp"

#include "knnad/error.hpp"
#include "knnad/random.hpp"
#include "knnad/rocauc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

namespace knnad {

std::string_view to_string(Protocol p) noexcept {
    switch (p) {
        case Protocol::unimodal: return "unimodal";
        case Protocol::multimodal: return "multimodal";
        case Protocol::group: return "group";
        case Protocol::sweep: return "sweep";
    }
    return "unknown";
}

void EvalReport::finalize_mean() {
    double sum = 0.0;
    std::size_t n = 0;
    if (!per_class_auc.empty()) {
        for (const auto& [cls, auc] : per_class_auc) {
            sum += auc;
            ++n;
        }
    } else {
        for (const auto& p : sweep) {
            sum += p.auc;
            ++n;
        }
    }
    mean_auc = n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
    // splitmix64 finalizer over the combined value.
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

namespace {

std::vector<std::size_t> rows_where(const LabelVector& labels, auto pred) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (pred(labels[i])) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> rows_of_class(const LabeledDataset& d, Label cls) {
    return rows_where(d.labels, [cls](Label l) { return l == cls; });
}

std::vector<Label> distinct_labels(const LabelVector& labels) {
    std::set<Label> s(labels.begin(), labels.end());
    return {s.begin(), s.end()};
}

void check_dims(const LabeledDataset& train, const LabeledDataset& test) {
    if (train.embeddings.dim() != test.embeddings.dim()) {
        throw ShapeError("train dim " + std::to_string(train.embeddings.dim()) + " != test dim " +
                         std::to_string(test.embeddings.dim()));
    }
}

double score_and_auc(const EmbeddingMatrix& train, const EmbeddingMatrix& test, const std::vector<bool>& truth,
                     const KnnParams& params) {
    return rocauc(knn_score(train, test, params), truth);
}

std::vector<bool> unimodal_truth(const LabeledDataset& test, Label normal_class) {
    std::vector<bool> truth(test.count());
    for (std::size_t i = 0; i < test.count(); ++i) {
        truth[i] = test.labels[i] != normal_class;
    }
    return truth;
}

std::vector<std::size_t> normal_train_rows(const LabeledDataset& train, Label normal_class) {
    auto rows = rows_of_class(train, normal_class);
    if (rows.empty()) {
        throw ParameterError("class " + std::to_string(normal_class) + " not present in training data");
    }
    return rows;
}

}  // namespace

double eval_unimodal(const LabeledDataset& train, const LabeledDataset& test, Label normal_class,
                     const KnnParams& params) {
    check_dims(train, test);
    auto rows = normal_train_rows(train, normal_class);
    return score_and_auc(train.embeddings.select_rows(rows), test.embeddings, unimodal_truth(test, normal_class),
                         params);
}

EvalReport eval_all_classes(const LabeledDataset& train, const LabeledDataset& test, const KnnParams& params) {
    EvalReport report;
    report.protocol = Protocol::unimodal;
    for (Label cls : distinct_labels(train.labels)) {
        report.per_class_auc[cls] = eval_unimodal(train, test, cls, params);
    }
    report.params["k"] = std::to_string(params.k);
    report.finalize_mean();
    return report;
}

double eval_multimodal(const LabeledDataset& train, const LabeledDataset& test, Label anomalous_class,
                       const KnnParams& params) {
    check_dims(train, test);
    auto rows = rows_where(train.labels, [anomalous_class](Label l) { return l != anomalous_class; });
    if (rows.empty()) {
        throw ParameterError("no training rows outside class " + std::to_string(anomalous_class));
    }
    std::vector<bool> truth(test.count());
    for (std::size_t i = 0; i < test.count(); ++i) {
        truth[i] = test.labels[i] == anomalous_class;
    }
    return score_and_auc(train.embeddings.select_rows(rows), test.embeddings, truth, params);
}

EvalReport eval_multimodal_all(const LabeledDataset& train, const LabeledDataset& test, const KnnParams& params) {
    EvalReport report;
    report.protocol = Protocol::multimodal;
    for (Label cls : distinct_labels(train.labels)) {
        report.per_class_auc[cls] = eval_multimodal(train, test, cls, params);
    }
    report.params["k"] = std::to_string(params.k);
    report.finalize_mean();
    return report;
}

std::map<std::size_t, double> sweep_training_size(const LabeledDataset& train, const LabeledDataset& test,
                                                  Label normal_class, std::span<const std::size_t> sizes,
                                                  std::uint64_t seed, const KnnParams& params) {
    check_dims(train, test);
    auto rows = normal_train_rows(train, normal_class);
    auto truth = unimodal_truth(test, normal_class);
    std::map<std::size_t, double> out;
    for (std::size_t n : sizes) {
        if (n < params.k) {
            throw ParameterError("training size " + std::to_string(n) + " is below k = " + std::to_string(params.k));
        }
        if (n > rows.size()) {
            throw ParameterError("training size " + std::to_string(n) + " exceeds the " +
                                 std::to_string(rows.size()) + " available normal rows");
        }
        Rng rng(derive_seed(seed, n));
        std::vector<std::size_t> picked;
        for (std::size_t i : rng.sample_without_replacement(rows.size(), n)) {
            picked.push_back(rows[i]);
        }
        out[n] = score_and_auc(train.embeddings.select_rows(picked), test.embeddings, truth, params);
    }
    return out;
}

std::map<double, double> sweep_impurity(const LabeledDataset& train, const LabeledDataset& test,
                                        Label normal_class, std::span<const double> ratios, bool clean,
                                        const CleaningParams& cleaning, std::uint64_t seed,
                                        const KnnParams& params) {
    check_dims(train, test);
    auto normal_rows = normal_train_rows(train, normal_class);
    auto other_rows = rows_where(train.labels, [normal_class](Label l) { return l != normal_class; });
    auto truth = unimodal_truth(test, normal_class);

    std::map<double, double> out;
    for (std::size_t r = 0; r < ratios.size(); ++r) {
        const double ratio = ratios[r];
        if (!(ratio >= 0.0 && ratio < 1.0)) {
            throw ParameterError("impurity ratio must be in [0, 1)");
        }
        const auto n_normal = static_cast<double>(normal_rows.size());
        const auto n_contam = static_cast<std::size_t>(std::llround(ratio * n_normal / (1.0 - ratio)));
        if (n_contam > other_rows.size()) {
            throw ParameterError("impurity ratio " + std::to_string(ratio) + " needs " + std::to_string(n_contam) +
                                 " contaminating rows, only " + std::to_string(other_rows.size()) + " available");
        }
        Rng rng(derive_seed(seed, std::bit_cast<std::uint64_t>(ratio)));
        std::vector<std::size_t> rows = normal_rows;
        for (std::size_t i : rng.sample_without_replacement(other_rows.size(), n_contam)) {
            rows.push_back(other_rows[i]);
        }
        EmbeddingMatrix contaminated = train.embeddings.select_rows(rows);
        if (clean) {
            CleaningParams cp = cleaning;
            if (cp.threads == 0) {
                cp.threads = params.threads;
            }
            contaminated = clean_training_set(contaminated, cp).kept;
        }
        out[ratio] = score_and_auc(contaminated, test.embeddings, truth, params);
    }
    return out;
}

std::map<std::size_t, double> sweep_k(const LabeledDataset& train, const LabeledDataset& test, Label normal_class,
                                      std::span<const std::size_t> ks, const KnnParams& params) {
    check_dims(train, test);
    auto rows = normal_train_rows(train, normal_class);
    EmbeddingMatrix normal = train.embeddings.select_rows(rows);
    auto truth = unimodal_truth(test, normal_class);
    std::map<std::size_t, double> out;
    for (std::size_t k : ks) {
        KnnParams p = params;
        p.k = k;
        out[k] = score_and_auc(normal, test.embeddings, truth, p);
    }
    return out;
}

namespace {

class ClassSampler {
public:
    ClassSampler(const LabeledDataset& pool, std::size_t classes) : pool_(pool) {
        for (std::size_t c = 0; c < classes; ++c) {
            by_class_.push_back(rows_of_class(pool, static_cast<Label>(c)));
            if (by_class_.back().empty()) {
                throw ParameterError("class " + std::to_string(c) + " missing from the image pool");
            }
        }
    }

    std::span<const float> draw(std::size_t cls, Rng& rng) const {
        const auto& rows = by_class_[cls];
        return pool_.embeddings.row(rows[rng.uniform_index(rows.size())]);
    }

private:
    const LabeledDataset& pool_;
    std::vector<std::vector<std::size_t>> by_class_;
};

EmbeddingMatrix build_set(const ClassSampler& sampler, std::span<const std::size_t> classes, std::size_t dim,
                          Rng& rng) {
    EmbeddingMatrixBuilder b(dim, classes.size());
    for (std::size_t c : classes) {
        b.push_row(sampler.draw(c, rng));
    }
    return std::move(b).build();
}

EmbeddingMatrix normal_group(const ClassSampler& sampler, std::size_t m, std::size_t dim, Rng& rng) {
    std::vector<std::size_t> classes(m);
    std::iota(classes.begin(), classes.end(), 0);
    rng.shuffle(std::span(classes));
    return build_set(sampler, classes, dim, rng);
}

EmbeddingMatrix anomalous_group(const ClassSampler& sampler, std::size_t m, std::size_t dim, Rng& rng) {
    std::vector<std::size_t> classes(m);
    std::vector<std::size_t> hist(m);
    do {
        std::fill(hist.begin(), hist.end(), 0);
        for (auto& c : classes) {
            c = rng.uniform_index(m);
            ++hist[c];
        }
    } while (std::all_of(hist.begin(), hist.end(), [](std::size_t h) { return h == 1; }));
    return build_set(sampler, classes, dim, rng);
}

}  // namespace

double eval_group_benchmark(const LabeledDataset& train_pool, const LabeledDataset& test_pool,
                            const GroupBenchmarkParams& bench, const KnnParams& params) {
    check_dims(train_pool, test_pool);
    if (bench.m == 0) {
        throw ParameterError("group size m must be >= 1");
    }
    if (bench.m == 1) {
        throw DegenerateInputError("with m = 1 every set is class-balanced; no anomalous set exists");
    }
    if (bench.n_train_sets == 0 || bench.n_test_sets == 0) {
        throw ParameterError("group benchmark needs at least one training and one test set");
    }
    const std::size_t dim = train_pool.embeddings.dim();
    ClassSampler train_sampler(train_pool, bench.m);
    ClassSampler test_sampler(test_pool, bench.m);

    Rng train_rng(derive_seed(bench.seed, 0));
    GroupSet train_sets;
    for (std::size_t i = 0; i < bench.n_train_sets; ++i) {
        train_sets.push_back(normal_group(train_sampler, bench.m, dim, train_rng));
    }

    Rng test_rng(derive_seed(bench.seed, 1));
    GroupSet test_sets;
    std::vector<bool> truth;
    for (std::size_t i = 0; i < bench.n_test_sets; ++i) {
        test_sets.push_back(normal_group(test_sampler, bench.m, dim, test_rng));
        truth.push_back(false);
        test_sets.push_back(anomalous_group(test_sampler, bench.m, dim, test_rng));
        truth.push_back(true);
    }

    return score_and_auc(pool_groupset(train_sets, bench.mode), pool_groupset(test_sets, bench.mode), truth,
                         params);
}

double eval_group_benchmark(const LabeledDataset& per_class_pool, const GroupBenchmarkParams& bench,
                            const KnnParams& params) {
    return eval_group_benchmark(per_class_pool, per_class_pool, bench, params);
}

double eval_covariance_trace_benchmark(const LabeledDataset& pool, const TraceBenchmarkParams& bench) {
    if (bench.min_size < 2 || bench.max_size < bench.min_size) {
        throw ParameterError("set sizes must satisfy 2 <= min_size <= max_size");
    }
    if (bench.n_sets == 0) {
        throw ParameterError("trace benchmark needs at least one set");
    }
    auto labels = distinct_labels(pool.labels);
    if (labels.size() < 2) {
        throw DegenerateInputError("trace benchmark needs at least two classes");
    }
    std::vector<std::vector<std::size_t>> by_class;
    for (Label l : labels) {
        by_class.push_back(rows_of_class(pool, l));
    }
    const std::size_t dim = pool.embeddings.dim();
    Rng rng(derive_seed(bench.seed, 2));
    auto draw = [&](std::size_t cls) {
        const auto& rows = by_class[cls];
        return pool.embeddings.row(rows[rng.uniform_index(rows.size())]);
    };

    GroupSet sets;
    std::vector<bool> truth;
    const std::size_t span = bench.max_size - bench.min_size + 1;
    for (std::size_t i = 0; i < bench.n_sets; ++i) {
        std::size_t size = bench.min_size + rng.uniform_index(span);
        EmbeddingMatrixBuilder normal(dim, size);
        std::size_t cls = rng.uniform_index(labels.size());
        for (std::size_t j = 0; j < size; ++j) {
            normal.push_row(draw(cls));
        }
        sets.push_back(std::move(normal).build());
        truth.push_back(false);

        size = bench.min_size + rng.uniform_index(span);
        std::vector<std::size_t> classes(size);
        do {
            for (auto& c : classes) {
                c = rng.uniform_index(labels.size());
            }
        } while (std::all_of(classes.begin(), classes.end(), [&](std::size_t c) { return c == classes[0]; }));
        EmbeddingMatrixBuilder mixed(dim, size);
        for (std::size_t c : classes) {
            mixed.push_row(draw(c));
        }
        sets.push_back(std::move(mixed).build());
        truth.push_back(true);
    }
    return rocauc(covariance_trace_score(sets), truth);
}

}  // namespace knnad
