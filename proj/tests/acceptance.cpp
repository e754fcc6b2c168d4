// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. All data is seeded and synthetic.

#include "knnad/cleaning.hpp"
#include "knnad/embedding_store.hpp"
#include "knnad/evaluation.hpp"
#include "knnad/kmeans.hpp"
#include "knnad/knn.hpp"
#include "knnad/random.hpp"
#include "knnad/rocauc.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

using namespace knnad;
using namespace knnad::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

// kNN vs full-distance-matrix oracle, 100 instances, rel tol 1e-5, < 10 s.
Outcome knn_oracle_equivalence() {
    constexpr double kRelTol = 1e-5;
    constexpr double kBudget = 10.0;
    const std::size_t ks[] = {1, 2, 5};
    Rng rng(1001);
    double worst = 0.0;
    std::size_t bad = 0;
    auto start = Clock::now();
    for (int inst = 0; inst < 100; ++inst) {
        std::size_t k = ks[inst % 3];
        std::size_t n = k + rng.uniform_index(501 - k);
        std::size_t q = 1 + rng.uniform_index(100);
        std::size_t d = 1 + rng.uniform_index(64);
        auto train = random_matrix(n, d, rng, 1.0 + 10.0 * rng.uniform01());
        auto queries = random_matrix(q, d, rng, 1.0 + 10.0 * rng.uniform01());
        auto got = knn_score(train, queries, {k});
        auto want = oracle_knn_score(train, queries, k);
        for (std::size_t i = 0; i < got.size(); ++i) {
            double rel = std::abs(got[i] - want[i]) / std::max(std::abs(want[i]), 1e-300);
            if (want[i] == 0.0) rel = std::abs(got[i]);
            worst = std::max(worst, rel);
            bad += rel > kRelTol;
        }
    }
    double elapsed = seconds_since(start);
    return {bad == 0 && elapsed < kBudget,
            fmt("100 instances, max rel err %.2e (tol %.0e), %.2f s (budget %.0f s)", worst, kRelTol, elapsed, kBudget)};
}

// Midrank ROCAUC vs O(n^2) pair counting, 100 sets with ties, 1e-12, < 5 s.
Outcome rocauc_oracle_equivalence() {
    constexpr double kTol = 1e-12;
    constexpr double kBudget = 5.0;
    Rng rng(1002);
    double worst = 0.0;
    auto start = Clock::now();
    for (int inst = 0; inst < 100; ++inst) {
        std::size_t n = 2 + rng.uniform_index(199);
        // A small value alphabet forces ties.
        std::size_t levels = 1 + rng.uniform_index(std::max<std::size_t>(2, n / 4));
        BinaryLabeledScores in;
        for (std::size_t i = 0; i < n; ++i) {
            in.scores.push_back(static_cast<double>(rng.uniform_index(levels)) * 0.37);
            in.is_anomalous.push_back(rng.uniform01() < 0.3);
        }
        // Both classes must be present.
        std::size_t pos = rng.uniform_index(n);
        in.is_anomalous[pos] = true;
        in.is_anomalous[(pos + 1 + rng.uniform_index(n - 1)) % n] = false;
        worst = std::max(worst, std::abs(rocauc(in) - oracle_auc(in.scores, in.is_anomalous)));
    }
    double elapsed = seconds_since(start);
    return {worst <= kTol && elapsed < kBudget,
            fmt("100 sets, max abs err %.2e (tol %.0e), %.3f s (budget %.0f s)", worst, kTol, elapsed, kBudget)};
}

// Blob of 450 + 50 outliers at 10 sigma; fraction 0.5, k 2; all removed, 10/10.
Outcome cleaning_recovery() {
    constexpr std::size_t kDim = 16;
    int passed = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(2000 + seed);
        std::vector<float> data;
        std::vector<double> origin(kDim, 0.0);
        append_blob(data, origin, 1.0, 450, rng);
        for (int i = 0; i < 50; ++i) {
            auto p = random_direction(kDim, 10.0, rng);
            data.insert(data.end(), p.begin(), p.end());
        }
        // Interleave outliers among inliers so index order carries no signal.
        std::vector<std::size_t> order(500);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(std::span(order));
        auto train = EmbeddingMatrix(500, kDim, std::move(data)).select_rows(order);

        auto result = clean_training_set(train, {0.5, 2});
        bool all = true;
        for (std::size_t pos = 0; pos < 500; ++pos) {
            if (order[pos] >= 450) {
                all &= std::binary_search(result.removed_indices.begin(), result.removed_indices.end(), pos);
            }
        }
        passed += all;
    }
    return {passed == 10, fmt("%d/10 seeds removed all 50 outliers (need 10/10)", passed)};
}

// Ten 16-d classes, 3 sigma offsets: the normal class sits at ~0.93 AUC,
// comparable to the real-feature regime.
ClassBlobSpec unimodal_spec() {
    return {.classes = 10, .dim = 16, .sigma = 1.0, .separation = 3.0, .train_per_class = 300, .test_per_class = 100};
}

// Cleaning helps on contaminated data; clean AUC at 0.1 within 0.03 of pure.
Outcome impurity_property() {
    const std::vector<double> ratios{0.0, 0.05, 0.1, 0.2};
    int wins[3] = {0, 0, 0};
    int close = 0;
    double worst_gap = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto data = class_blobs(unimodal_spec(), 3000 + seed);
        auto normal = static_cast<Label>(seed % 10);
        auto dirty = sweep_impurity(data.train, data.test, normal, ratios, false, {}, seed);
        auto cleaned = sweep_impurity(data.train, data.test, normal, ratios, true, {.removal_fraction = 0.5, .k = 2}, seed);
        for (int i = 0; i < 3; ++i) {
            wins[i] += cleaned.at(ratios[i + 1]) >= dirty.at(ratios[i + 1]);
        }
        double gap = std::abs(cleaned.at(0.1) - dirty.at(0.0));
        worst_gap = std::max(worst_gap, gap);
        close += gap <= 0.03;
    }
    bool pass = wins[0] >= 9 && wins[1] >= 9 && wins[2] >= 9 && close == 10;
    return {pass, fmt("clean>=dirty seeds: eps0.05 %d/10, eps0.1 %d/10, eps0.2 %d/10 (need 9); "
                      "|clean@0.1 - pure| <= 0.03 in %d/10 seeds (max %.4f)",
                      wins[0], wins[1], wins[2], close, worst_gap)};
}

// Codebook (C in {1,3,5,10}) within 0.03 AUC of full kNN, 10 seeds.
Outcome codebook_property() {
    int ok = 0, total = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto data = class_blobs(unimodal_spec(), 4000 + seed);
        auto normal = static_cast<Label>(seed % 10);
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < data.train.count(); ++i) {
            if (data.train.labels[i] == normal) rows.push_back(i);
        }
        auto train = data.train.embeddings.select_rows(rows);
        std::vector<bool> truth;
        for (Label l : data.test.labels) truth.push_back(l != normal);
        double knn_auc = rocauc(knn_score(train, data.test.embeddings, {2}), truth);
        for (std::size_t c : {1u, 3u, 5u, 10u}) {
            auto cb = kmeans_fit(train, {.clusters = c, .seed = seed});
            double auc = rocauc(codebook_score(cb, data.test.embeddings, 2), truth);
            double gap = std::abs(auc - knn_auc);
            worst = std::max(worst, gap);
            ok += gap <= 0.03;
            ++total;
        }
    }
    return {ok == total, fmt("%d/%d (seed, C) pairs within 0.03 of kNN AUC (max gap %.4f)", ok, total, worst)};
}

// Mean pooling vs concat for M in {4,6,8}; mean >= 0.9 at M = 6, 5 sigma.
Outcome group_pooling_property() {
    std::string detail;
    bool pass = true;
    for (std::size_t m : {4u, 6u, 8u}) {
        int wins = 0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            auto data = class_blobs({.classes = m, .dim = 256, .separation = 5.0, .train_per_class = 200,
                                     .test_per_class = 200},
                                    5000 + seed);
            GroupBenchmarkParams bench{.m = m, .n_train_sets = 1000, .n_test_sets = 200, .mode = PoolingMode::mean,
                                       .seed = seed};
            double mean_auc = eval_group_benchmark(data.train, data.test, bench);
            bench.mode = PoolingMode::concat;
            double concat_auc = eval_group_benchmark(data.train, data.test, bench);
            wins += mean_auc >= concat_auc;
        }
        pass &= wins >= 9;
        detail += fmt("M=%zu mean>=concat %d/10; ", m, wins);
    }
    double min_auc = 1.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto data = class_blobs({.classes = 6, .dim = 8, .separation = 5.0, .train_per_class = 200,
                                 .test_per_class = 200},
                                5100 + seed);
        GroupBenchmarkParams bench{.m = 6, .n_train_sets = 1000, .n_test_sets = 250, .mode = PoolingMode::mean,
                                   .seed = seed};
        min_auc = std::min(min_auc, eval_group_benchmark(data.train, data.test, bench));
    }
    pass &= min_auc >= 0.9;
    detail += fmt("M=6 mean-pooled AUC min over 10 seeds %.4f (need >= 0.9)", min_auc);
    return {pass, detail};
}

// Covariance trace on same-class vs mixed-class sets of 10-50, 5 sigma.
Outcome covariance_trace_property() {
    double min_auc = 1.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto data = class_blobs({.classes = 10, .dim = 16, .separation = 5.0, .train_per_class = 300}, 6000 + seed);
        double auc = eval_covariance_trace_benchmark(
            data.train, {.min_size = 10, .max_size = 50, .n_sets = 200, .seed = seed});
        min_auc = std::min(min_auc, auc);
    }
    return {min_auc >= 0.9, fmt("min AUC over 10 seeds %.4f (need >= 0.9)", min_auc)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// Every CLI subcommand, run twice at 1 and at 8 threads, gives identical bytes.
Outcome cli_determinism() {
    const fs::path dir = fs::temp_directory_path() / ("knnad_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    auto p = [&](const std::string& name) { return (dir / name).string(); };

    auto data = class_blobs({.classes = 4, .dim = 12, .separation = 3.0, .train_per_class = 150, .test_per_class = 60},
                            7000);
    write_embeddings_file(data.train.embeddings, p("train.dn2e"));
    write_embeddings_file(data.test.embeddings, p("test.dn2e"));
    {
        std::ofstream a(p("train.labels")), b(p("test.labels"));
        write_labels(data.train.labels, a);
        write_labels(data.test.labels, b);
        std::ofstream g(p("pool.groups"));
        for (std::size_t i = 0; i < data.train.count(); ++i) g << (i * 7) % 40 << '\n';
    }

    const std::string io = " --train " + p("train.dn2e") + " --train-labels " + p("train.labels") + " --test " +
                           p("test.dn2e") + " --test-labels " + p("test.labels");
    struct Command {
        std::string name;
        std::string args;  // without --threads/--out
        std::vector<std::string> extra_outputs;  // suffixes written next to --out
    };
    const std::vector<Command> commands = {
        {"score", "score --train " + p("train.dn2e") + " --queries " + p("test.dn2e") + " --k 2", {}},
        {"score-codebook", "score --codebook " + p("ref_codebook.dn2e") + " --queries " + p("test.dn2e"), {}},
        {"clean", "clean --train " + p("train.dn2e") + " --removal-fraction 0.5 --k 2", {".removed"}},
        {"kmeans", "kmeans --train " + p("train.dn2e") + " --clusters 10 --seed 5", {".json"}},
        {"pool-mean", "pool --embeddings " + p("train.dn2e") + " --groups " + p("pool.groups") + " --mode mean", {}},
        {"pool-trace", "pool --embeddings " + p("train.dn2e") + " --groups " + p("pool.groups") + " --covariance-trace", {}},
        {"eval-unimodal", "eval --protocol unimodal" + io, {}},
        {"eval-multimodal", "eval --protocol multimodal" + io, {}},
        {"eval-size-sweep", "eval --protocol size-sweep --normal-class 1 --sizes 5,20,100 --seed 3" + io, {}},
        {"eval-impurity-sweep",
         "eval --protocol impurity-sweep --normal-class 2 --ratios 0,0.1,0.2 --clean --seed 3" + io, {}},
        {"eval-k-sweep", "eval --protocol k-sweep --normal-class 0 --ks 1,2,5" + io, {}},
        {"eval-group", "eval --protocol group --m 4 --train-sets 200 --test-sets 50 --seed 3" + io, {}},
        {"eval-trace", "eval --protocol trace --test-sets 30 --seed 3" + io, {}},
    };

    const std::string bin = KNNAD_CLI_PATH;
    auto sh = [](const std::string& cmd) {
        int status = std::system((cmd + " >/dev/null 2>&1").c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    if (sh(bin + " kmeans --train " + p("train.dn2e") + " --clusters 8 --seed 1 --out " + p("ref_codebook.dn2e")) != 0) {
        return {false, "could not build reference codebook"};
    }

    std::vector<std::string> failures;
    for (const auto& cmd : commands) {
        std::vector<std::string> snapshots;
        bool ran = true;
        for (unsigned threads : {1u, 8u}) {
            for (int rep = 0; rep < 2; ++rep) {
                std::string out = p(cmd.name + "_t" + std::to_string(threads) + "_r" + std::to_string(rep));
                std::string line = bin + " " + cmd.args + " --threads " + std::to_string(threads) + " --out " + out;
                if (sh(line) != 0) {
                    ran = false;
                    break;
                }
                std::string snap = slurp(out);
                for (const auto& suffix : cmd.extra_outputs) snap += "\x1f" + slurp(out + suffix);
                snapshots.push_back(std::move(snap));
            }
        }
        bool same = ran && std::all_of(snapshots.begin(), snapshots.end(),
                                        [&](const std::string& s) { return s == snapshots.front(); });
        if (!same) failures.push_back(cmd.name + (ran ? " (differs)" : " (failed to run)"));
    }
    fs::remove_all(dir);

    std::string detail = fmt("%zu/%zu commands byte-identical across 2 runs x threads {1,8}",
                             commands.size() - failures.size(), commands.size());
    for (const auto& f : failures) detail += "; " + f;
    return {failures.empty(), detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"kNN oracle equivalence", knn_oracle_equivalence},
        {"ROCAUC oracle equivalence", rocauc_oracle_equivalence},
        {"Cleaning recovery", cleaning_recovery},
        {"Impurity property", impurity_property},
        {"Codebook approximation property", codebook_property},
        {"Group pooling property", group_pooling_property},
        {"Covariance-trace property", covariance_trace_property},
        {"Determinism", cli_determinism},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        auto start = Clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("[%s] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), seconds_since(start));
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d/%zu acceptance criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
