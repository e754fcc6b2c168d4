#pragma once

#include "knnad/cleaning.hpp"
#include "knnad/embedding_store.hpp"
#include "knnad/group.hpp"
#include "knnad/knn.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace knnad {

enum class Protocol { unimodal, multimodal, group, sweep };

std::string_view to_string(Protocol p) noexcept;

/// One measured point of a sweep: the swept value and its ROCAUC.
struct SweepPoint {
    double value;
    double auc;

    friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

struct EvalReport {
    Protocol protocol = Protocol::unimodal;
    /// Class protocols: AUC per designated class.
    std::map<Label, double> per_class_auc;
    /// Sweep protocols: swept parameter name ("size", "ratio", "k") and points.
    std::string sweep_axis;
    std::vector<SweepPoint> sweep;
    /// Mean over per_class_auc, or over the sweep points when there are no
    /// classes.
    double mean_auc = 0.0;
    /// Full parameter record (k, seeds, fractions, ...), stringified.
    std::map<std::string, std::string> params;

    void finalize_mean();
};

/// Seed for an independent stream derived from a base seed and a tag.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

/// One class normal, all others anomalous. Trains on the train rows labeled
/// `normal_class`, scores every test row. ParameterError if the class is
/// absent from train; DegenerateInputError if test lacks either side.
double eval_unimodal(const LabeledDataset& train, const LabeledDataset& test, Label normal_class,
                     const KnnParams& params = {});

/// eval_unimodal for every class present in train, plus the average.
EvalReport eval_all_classes(const LabeledDataset& train, const LabeledDataset& test, const KnnParams& params = {});

/// Every class but `anomalous_class` is normal, pooled as one unlabeled
/// multimodal class.
double eval_multimodal(const LabeledDataset& train, const LabeledDataset& test, Label anomalous_class,
                       const KnnParams& params = {});

/// eval_multimodal with each train class held out in turn.
EvalReport eval_multimodal_all(const LabeledDataset& train, const LabeledDataset& test, const KnnParams& params = {});

/// Few-shot curve: AUC when training on n normal rows sampled without
/// replacement (seeded; each size draws from its own stream). Sampled rows
/// keep their original order, so n = all normal rows reproduces
/// eval_unimodal exactly. ParameterError when n < k or n exceeds the
/// available normal rows.
std::map<std::size_t, double> sweep_training_size(const LabeledDataset& train, const LabeledDataset& test,
                                                  Label normal_class, std::span<const std::size_t> sizes,
                                                  std::uint64_t seed, const KnnParams& params = {});

/// Contaminated-training curve. For each ratio r in [0, 1) the normal train
/// rows are joined by round(r * n / (1 - r)) rows drawn from the other
/// classes, so contaminants make up fraction r of the set. With `clean`
/// the set first goes through clean_training_set. Ratios above the removal
/// fraction are accepted but break the cleaning stage's premise.
std::map<double, double> sweep_impurity(const LabeledDataset& train, const LabeledDataset& test,
                                        Label normal_class, std::span<const double> ratios, bool clean,
                                        const CleaningParams& cleaning, std::uint64_t seed,
                                        const KnnParams& params = {});

/// AUC of eval_unimodal for each neighbor count.
std::map<std::size_t, double> sweep_k(const LabeledDataset& train, const LabeledDataset& test, Label normal_class,
                                      std::span<const std::size_t> ks, const KnnParams& params = {});

struct GroupBenchmarkParams {
    /// Set size; classes 0..m-1 take part.
    std::size_t m = 2;
    std::size_t n_train_sets = 1000;
    /// Count of normal and, separately, of anomalous test sets.
    std::size_t n_test_sets = 500;
    PoolingMode mode = PoolingMode::mean;
    std::uint64_t seed = 0;
};

/// Set-level benchmark. Normal sets hold one image of each class 0..m-1 in
/// random order; anomalous sets hold m images of uniformly drawn classes,
/// redrawn while the class histogram is exactly balanced. Sets are pooled
/// and test sets kNN-scored against the pooled training sets. Training sets
/// draw images from `train_pool`, test sets from `test_pool`.
/// DegenerateInputError for m = 1 (no anomalous set exists).
double eval_group_benchmark(const LabeledDataset& train_pool, const LabeledDataset& test_pool,
                            const GroupBenchmarkParams& bench, const KnnParams& params = {});
double eval_group_benchmark(const LabeledDataset& per_class_pool, const GroupBenchmarkParams& bench,
                            const KnnParams& params = {});

struct TraceBenchmarkParams {
    std::size_t min_size = 10;
    std::size_t max_size = 50;
    /// Count of normal and, separately, of anomalous sets.
    std::size_t n_sets = 200;
    std::uint64_t seed = 0;
};

/// Training-free benchmark for covariance_trace_score. Normal sets draw all
/// images from one random class, anomalous sets draw each image from an
/// independently chosen class (redrawn while all share one class). Set
/// sizes are uniform in [min_size, max_size].
double eval_covariance_trace_benchmark(const LabeledDataset& pool, const TraceBenchmarkParams& bench);

}  // namespace knnad
