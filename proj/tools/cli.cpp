#include "cli.hpp"

#include "knnad/cleaning.hpp"
#include "knnad/embedding_store.hpp"
#include "knnad/error.hpp"
#include "knnad/evaluation.hpp"
#include "knnad/group.hpp"
#include "knnad/kmeans.hpp"
#include "knnad/knn.hpp"
#include "knnad/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace knnad::cli {

namespace {

namespace fs = std::filesystem;

// Everything the subcommands can be configured with. Recorded verbatim in
// evaluation reports.
struct RunConfig {
    std::string subcommand;
    std::string train_path;
    std::string train_labels_path;
    std::string test_path;
    std::string test_labels_path;
    std::string query_path;
    std::string codebook_path;
    std::string embeddings_path;
    std::string groups_path;
    std::string out_path;
    std::string removed_out_path;
    std::string ids_out_path;
    std::string json_out_path;
    std::string protocol;
    std::size_t k = kDefaultK;
    std::size_t clusters = 1;
    std::size_t max_iters = 100;
    double rel_tol = 1e-6;
    double removal_fraction = 0.5;
    std::string mode = "mean";
    bool covariance_trace = false;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::optional<Label> normal_class;
    std::optional<Label> anomalous_class;
    std::vector<std::size_t> sizes;
    std::vector<double> ratios;
    std::vector<std::size_t> ks;
    bool clean = false;
    std::size_t m = 2;
    std::size_t train_sets = 1000;
    std::size_t test_sets = 500;
    std::size_t min_set_size = 10;
    std::size_t max_set_size = 50;
};

const std::vector<std::string> kProtocols = {"unimodal",      "multimodal", "size-sweep", "impurity-sweep",
                                             "k-sweep",       "group",      "trace"};

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) {
        throw ParameterError("missing " + what);
    }
    if (!fs::is_regular_file(path)) {
        throw IoError(what + " not found: " + path);
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out) {
        throw IoError("cannot write " + path);
    }
}

std::string scores_text(const ScoreVector& scores) {
    std::string text;
    for (double s : scores) {
        text += format_double(s);
        text += '\n';
    }
    return text;
}

template <typename T>
std::string join(const std::vector<T>& values) {
    std::string s;
    for (const auto& v : values) {
        if (!s.empty()) {
            s += ',';
        }
        if constexpr (std::is_floating_point_v<T>) {
            s += format_double(v);
        } else {
            s += std::to_string(v);
        }
    }
    return s;
}

PoolingMode pooling_mode(const std::string& name) {
    auto mode = parse_pooling_mode(name);
    if (!mode) {
        throw ParameterError("unknown pooling mode " + name);
    }
    return *mode;
}

LabeledDataset load_labeled(const std::string& path, const std::string& labels_path, const std::string& what) {
    require_file(path, what + " embeddings");
    require_file(labels_path, what + " labels");
    auto m = read_embeddings_file(path);
    auto labels = read_labels_file(labels_path, m.count());
    return LabeledDataset(std::move(m), std::move(labels));
}

int cmd_score(const RunConfig& cfg, std::ostream&) {
    if (cfg.train_path.empty() && cfg.codebook_path.empty()) {
        throw ParameterError("score needs --train or --codebook");
    }
    require_file(cfg.query_path, "query file");
    std::optional<EmbeddingMatrix> train;
    std::optional<EmbeddingMatrix> codebook;
    if (!cfg.codebook_path.empty()) {
        require_file(cfg.codebook_path, "codebook file");
        codebook = read_embeddings_file(cfg.codebook_path);
    } else {
        require_file(cfg.train_path, "training file");
        train = read_embeddings_file(cfg.train_path);
    }
    auto queries = read_embeddings_file(cfg.query_path);

    ScoreVector scores;
    if (codebook) {
        scores = codebook_score(KMeansCodebook::from_centroids(std::move(*codebook)), queries, cfg.k, cfg.threads);
    } else {
        scores = knn_score(*train, queries, KnnParams{cfg.k, cfg.threads});
    }
    write_text(cfg.out_path, scores_text(scores));
    return kExitOk;
}

int cmd_clean(const RunConfig& cfg, std::ostream& out) {
    require_file(cfg.train_path, "training file");
    auto train = read_embeddings_file(cfg.train_path);
    auto result = clean_training_set(train, CleaningParams{cfg.removal_fraction, cfg.k, cfg.threads});
    write_embeddings_file(result.kept, cfg.out_path);
    std::string removed_path = cfg.removed_out_path.empty() ? cfg.out_path + ".removed" : cfg.removed_out_path;
    std::string text;
    for (std::size_t i : result.removed_indices) {
        text += std::to_string(i) + '\n';
    }
    write_text(removed_path, text);
    out << "kept=" << result.kept_indices.size() << " removed=" << result.removed_indices.size() << '\n';
    return kExitOk;
}

int cmd_kmeans(const RunConfig& cfg, std::ostream& out) {
    require_file(cfg.train_path, "training file");
    auto train = read_embeddings_file(cfg.train_path);
    auto cb = kmeans_fit(train, KMeansParams{cfg.clusters, cfg.seed, cfg.max_iters, cfg.rel_tol, cfg.threads});
    write_embeddings_file(cb.centroids, cfg.out_path);

    nlohmann::ordered_json info;
    info["clusters"] = cb.size();
    info["dim"] = cb.centroids.dim();
    info["seed"] = cb.seed;
    info["iterations_run"] = cb.iterations_run;
    info["inertia"] = cb.inertia;
    info["inertia_trace"] = cb.inertia_trace;
    write_text(cfg.out_path + ".json", info.dump(2) + "\n");
    out << "clusters=" << cb.size() << " iterations=" << cb.iterations_run
        << " inertia=" << format_double(cb.inertia) << '\n';
    return kExitOk;
}

int cmd_pool(const RunConfig& cfg, std::ostream&) {
    require_file(cfg.embeddings_path, "embedding file");
    require_file(cfg.groups_path, "group index file");
    auto rows = read_embeddings_file(cfg.embeddings_path);
    auto ids = read_labels_file(cfg.groups_path, rows.count());
    auto mode = pooling_mode(cfg.mode);
    auto grouped = group_rows(rows, ids);

    if (cfg.covariance_trace) {
        write_text(cfg.out_path, scores_text(covariance_trace_score(grouped.groups)));
    } else {
        write_embeddings_file(pool_groupset(grouped.groups, mode), cfg.out_path);
    }
    if (!cfg.ids_out_path.empty()) {
        std::ostringstream s;
        write_labels(grouped.group_ids, s);
        write_text(cfg.ids_out_path, s.str());
    }
    return kExitOk;
}

void record_config(const RunConfig& cfg, EvalReport& report) {
    auto& p = report.params;
    p["protocol"] = cfg.protocol;
    p["k"] = std::to_string(cfg.k);
    p["seed"] = std::to_string(cfg.seed);
    p["train"] = cfg.train_path;
    p["train_labels"] = cfg.train_labels_path;
    if (!cfg.test_path.empty()) {
        p["test"] = cfg.test_path;
        p["test_labels"] = cfg.test_labels_path;
    }
    if (cfg.normal_class) p["normal_class"] = std::to_string(*cfg.normal_class);
    if (cfg.anomalous_class) p["anomalous_class"] = std::to_string(*cfg.anomalous_class);
    if (cfg.protocol == "size-sweep") p["sizes"] = join(cfg.sizes);
    if (cfg.protocol == "k-sweep") p["ks"] = join(cfg.ks);
    if (cfg.protocol == "impurity-sweep") {
        p["ratios"] = join(cfg.ratios);
        p["clean"] = cfg.clean ? "true" : "false";
        p["removal_fraction"] = format_double(cfg.removal_fraction);
    }
    if (cfg.protocol == "group") {
        p["m"] = std::to_string(cfg.m);
        p["mode"] = cfg.mode;
        p["train_sets"] = std::to_string(cfg.train_sets);
        p["test_sets"] = std::to_string(cfg.test_sets);
    }
    if (cfg.protocol == "trace") {
        p["min_set_size"] = std::to_string(cfg.min_set_size);
        p["max_set_size"] = std::to_string(cfg.max_set_size);
        p["test_sets"] = std::to_string(cfg.test_sets);
    }
}

template <typename Key>
void fill_sweep(EvalReport& report, std::string axis, const std::map<Key, double>& points) {
    report.protocol = Protocol::sweep;
    report.sweep_axis = std::move(axis);
    for (const auto& [value, auc] : points) {
        report.sweep.push_back(SweepPoint{static_cast<double>(value), auc});
    }
}

Label require_class(const std::optional<Label>& cls, const char* flag) {
    if (!cls) {
        throw ParameterError(std::string("this protocol needs ") + flag);
    }
    return *cls;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out) {
    const bool needs_test = cfg.protocol != "trace";
    // Load and validate every input before any computation.
    LabeledDataset train = load_labeled(cfg.train_path, cfg.train_labels_path, "training");
    LabeledDataset test;
    if (needs_test) {
        test = load_labeled(cfg.test_path, cfg.test_labels_path, "test");
    }
    const KnnParams params{cfg.k, cfg.threads};

    EvalReport report;
    if (cfg.protocol == "unimodal") {
        if (cfg.normal_class) {
            report.protocol = Protocol::unimodal;
            report.per_class_auc[*cfg.normal_class] = eval_unimodal(train, test, *cfg.normal_class, params);
        } else {
            report = eval_all_classes(train, test, params);
        }
    } else if (cfg.protocol == "multimodal") {
        if (cfg.anomalous_class) {
            report.protocol = Protocol::multimodal;
            report.per_class_auc[*cfg.anomalous_class] = eval_multimodal(train, test, *cfg.anomalous_class, params);
        } else {
            report = eval_multimodal_all(train, test, params);
        }
    } else if (cfg.protocol == "size-sweep") {
        Label cls = require_class(cfg.normal_class, "--normal-class");
        fill_sweep(report, "size", sweep_training_size(train, test, cls, cfg.sizes, cfg.seed, params));
    } else if (cfg.protocol == "impurity-sweep") {
        Label cls = require_class(cfg.normal_class, "--normal-class");
        CleaningParams cleaning{cfg.removal_fraction, cfg.k, cfg.threads};
        fill_sweep(report, "ratio", sweep_impurity(train, test, cls, cfg.ratios, cfg.clean, cleaning, cfg.seed, params));
    } else if (cfg.protocol == "k-sweep") {
        Label cls = require_class(cfg.normal_class, "--normal-class");
        fill_sweep(report, "k", sweep_k(train, test, cls, cfg.ks, params));
    } else if (cfg.protocol == "group") {
        report.protocol = Protocol::group;
        GroupBenchmarkParams bench{cfg.m, cfg.train_sets, cfg.test_sets, pooling_mode(cfg.mode), cfg.seed};
        report.per_class_auc[static_cast<Label>(cfg.m)] = eval_group_benchmark(train, test, bench, params);
    } else if (cfg.protocol == "trace") {
        report.protocol = Protocol::group;
        TraceBenchmarkParams bench{cfg.min_set_size, cfg.max_set_size, cfg.test_sets, cfg.seed};
        report.sweep_axis.clear();
        report.sweep.push_back(SweepPoint{0.0, eval_covariance_trace_benchmark(train, bench)});
    } else {
        throw ParameterError("unknown protocol " + cfg.protocol);
    }
    report.params.clear();
    record_config(cfg, report);
    report.finalize_mean();

    std::string kv = to_key_value(report);
    write_text(cfg.out_path, kv);
    if (!cfg.json_out_path.empty()) {
        write_text(cfg.json_out_path, to_json(report));
    }
    out << kv;
    return kExitOk;
}

void add_common(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--threads", cfg.threads, "Worker thread cap (0 = all cores)");
    cmd->add_option("--out", cfg.out_path, "Output path")->required();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"kNN anomaly detection over deep feature embeddings"};
    app.name(args.empty() ? "knnad" : fs::path(args[0]).filename().string());
    app.require_subcommand(1);

    auto* score = app.add_subcommand("score", "Score query embeddings by kNN distance");
    score->add_option("--train", cfg.train_path, "Training embeddings (DN2E)");
    score->add_option("--queries", cfg.query_path, "Query embeddings (DN2E)")->required();
    score->add_option("--codebook", cfg.codebook_path, "Centroid file from `kmeans`; replaces --train");
    score->add_option("--k", cfg.k, "Neighbor count")->capture_default_str();
    add_common(score, cfg);

    auto* clean = app.add_subcommand("clean", "Drop the most anomalous fraction of a training set");
    clean->add_option("--train", cfg.train_path, "Training embeddings (DN2E)")->required();
    clean->add_option("--removal-fraction", cfg.removal_fraction, "Fraction of rows to drop")->capture_default_str();
    clean->add_option("--k", cfg.k, "Neighbor count")->capture_default_str();
    clean->add_option("--removed-out", cfg.removed_out_path, "Removed row indices (default <out>.removed)");
    add_common(clean, cfg);

    auto* kmeans = app.add_subcommand("kmeans", "Fit a k-means codebook to a training set");
    kmeans->add_option("--train", cfg.train_path, "Training embeddings (DN2E)")->required();
    kmeans->add_option("--clusters", cfg.clusters, "Codebook size")->required();
    kmeans->add_option("--seed", cfg.seed, "Initialization seed")->capture_default_str();
    kmeans->add_option("--max-iters", cfg.max_iters, "Lloyd iteration cap")->capture_default_str();
    kmeans->add_option("--rel-tol", cfg.rel_tol, "Relative inertia improvement to stop at")->capture_default_str();
    add_common(kmeans, cfg);

    auto* pool = app.add_subcommand("pool", "Pool per-image embeddings into group embeddings");
    pool->add_option("--embeddings", cfg.embeddings_path, "Per-image embeddings (DN2E)")->required();
    pool->add_option("--groups", cfg.groups_path, "Group id per row, one per line")->required();
    pool->add_option("--mode", cfg.mode, "Pooling mode")
        ->check(CLI::IsMember({"mean", "max", "concat"}))
        ->capture_default_str();
    pool->add_flag("--covariance-trace", cfg.covariance_trace, "Write covariance-trace group scores instead");
    pool->add_option("--ids-out", cfg.ids_out_path, "Group id of each output row");
    add_common(pool, cfg);

    auto* eval = app.add_subcommand("eval", "Run an evaluation protocol and write a report");
    eval->add_option("--protocol", cfg.protocol, "Evaluation protocol")->required()->check(CLI::IsMember(kProtocols));
    eval->add_option("--train", cfg.train_path, "Training embeddings (DN2E)")->required();
    eval->add_option("--train-labels", cfg.train_labels_path, "Training labels")->required();
    eval->add_option("--test", cfg.test_path, "Test embeddings (DN2E)");
    eval->add_option("--test-labels", cfg.test_labels_path, "Test labels");
    eval->add_option("--k", cfg.k, "Neighbor count")->capture_default_str();
    eval->add_option("--normal-class", cfg.normal_class, "Normal class (unimodal; all classes if omitted)");
    eval->add_option("--anomalous-class", cfg.anomalous_class, "Held-out class (multimodal; all if omitted)");
    eval->add_option("--sizes", cfg.sizes, "Training sizes for size-sweep")->delimiter(',');
    eval->add_option("--ratios", cfg.ratios, "Impurity ratios for impurity-sweep")->delimiter(',');
    eval->add_option("--ks", cfg.ks, "Neighbor counts for k-sweep")->delimiter(',');
    eval->add_flag("--clean", cfg.clean, "Clean the contaminated training set first (impurity-sweep)");
    eval->add_option("--removal-fraction", cfg.removal_fraction, "Cleaning removal fraction")->capture_default_str();
    eval->add_option("--m", cfg.m, "Set size (group)")->capture_default_str();
    eval->add_option("--mode", cfg.mode, "Pooling mode (group)")
        ->check(CLI::IsMember({"mean", "max", "concat"}))
        ->capture_default_str();
    eval->add_option("--train-sets", cfg.train_sets, "Training sets (group)")->capture_default_str();
    eval->add_option("--test-sets", cfg.test_sets, "Normal and anomalous test sets each (group, trace)")
        ->capture_default_str();
    eval->add_option("--min-set-size", cfg.min_set_size, "Smallest set (trace)")->capture_default_str();
    eval->add_option("--max-set-size", cfg.max_set_size, "Largest set (trace)")->capture_default_str();
    eval->add_option("--seed", cfg.seed, "Sampling seed")->capture_default_str();
    eval->add_option("--json-out", cfg.json_out_path, "Structured JSON report");
    add_common(eval, cfg);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) {
        reversed.pop_back();
    }
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << app.get_name() << ": " << e.what() << "\n";
        auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    const std::map<CLI::App*, std::function<int(const RunConfig&, std::ostream&)>> commands = {
        {score, cmd_score}, {clean, cmd_clean}, {kmeans, cmd_kmeans}, {pool, cmd_pool}, {eval, cmd_eval}};
    CLI::App* chosen = app.get_subcommands().front();
    cfg.subcommand = chosen->get_name();
    try {
        return commands.at(chosen)(cfg, out);
    } catch (const Error& e) {
        err << app.get_name() << " " << cfg.subcommand << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << app.get_name() << " " << cfg.subcommand << ": internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace knnad::cli
