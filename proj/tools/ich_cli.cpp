// ich: command-line front end for iterative cluster harvesting.
//
//   ich generate --classes Center=40,Ring=40 --size 64 --seed 0 --out data/
//   ich run ich data/features.ichf --out runs/ich
//   ich run otc data/features.ichf --k 12 --out runs/otc
//   ich evaluate runs/ich/assignment.csv data/features.ichf --out eval/
//   ich report runs/ich/outcome.json data/features.ichf --out report/
//   ich compare data/features.ichf --out bench/
//
// Exit codes: 0 success, 1 data/runtime error, 2 usage/config error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ich/ich.hpp"

namespace fs = std::filesystem;
using ich::json;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string file_digest(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(ss.str())));
    return buf;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::trunc | std::ios::binary);
    if (!out) throw ich::DataError("cannot write '" + p.string() + "'");
    out << text;
}

/// Collects what a command read and wrote; written as manifest.json.
struct Manifest {
    std::string command;
    std::vector<std::string> argv;
    json config = nullptr;
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;
    std::uint64_t seed = 0;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void write(const fs::path& dir) const {
        json outs = json::array();
        for (const auto& p : outputs) {
            if (!fs::is_regular_file(p)) continue;
            outs.push_back({{"path", fs::relative(p, dir).generic_string()}, {"fnv1a64", file_digest(p)}});
        }
        json ins = json::array();
        for (const auto& p : inputs) ins.push_back(p.generic_string());
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json m{{"command", command}, {"argv", argv},     {"config", config},
               {"inputs", ins},      {"outputs", outs},  {"tool_version", ICH_VERSION},
               {"seed", seed},       {"wall_clock_seconds", secs}};
        write_text(dir / "manifest.json", m.dump(2) + "\n");
    }
};

std::map<std::string, std::size_t> parse_class_counts(const std::string& spec) {
    std::map<std::string, std::size_t> counts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ich::ConfigError("class count '" + item + "' must look like Label=N");
        const std::string label = item.substr(0, eq);
        const std::string num = item.substr(eq + 1);
        std::size_t used = 0;
        long long n = -1;
        try {
            n = std::stoll(num, &used);
        } catch (const std::exception&) {
        }
        if (used != num.size() || n < 0) throw ich::ConfigError("invalid count '" + num + "' for " + label);
        if (label == "all") {
            for (const auto& c : ich::defect_classes()) counts[c] = static_cast<std::size_t>(n);
        } else {
            if (!ich::is_defect_class(label)) throw ich::ConfigError("unknown defect class '" + label + "'");
            counts[label] = static_cast<std::size_t>(n);
        }
    }
    if (counts.empty()) throw ich::ConfigError("no class counts given");
    return counts;
}

/// Flags shared by run and compare.
struct ConfigFlags {
    std::size_t n_pca = 20;
    std::size_t n_c = 15;
    std::size_t n_min = 5;
    std::string metric = "cosine";
    std::string dimred = "pca";
    std::string cluster = "ward";
    std::uint64_t seed = 0;
    bool full_assign = false;
    bool trace = false;

    void attach(CLI::App* app, bool with_assign_flags) {
        app->add_option("--n-pca", n_pca, "principal components per iteration")->capture_default_str();
        app->add_option("--n-clusters", n_c, "clusters per iteration")->capture_default_str();
        app->add_option("--n-min", n_min, "minimum surviving cluster size")->capture_default_str();
        app->add_option("--silhouette-metric", metric, "cosine or euclidean")->capture_default_str();
        app->add_option("--dimred", dimred, "pca, svd or none")->capture_default_str();
        app->add_option("--cluster", cluster, "ward or kmeans")->capture_default_str();
        app->add_option("--seed", seed, "seed for stochastic methods")->capture_default_str();
        if (with_assign_flags) {
            app->add_flag("--full-assign", full_assign, "assign rest/small samples by nearest neighbor");
            app->add_flag("--trace", trace, "keep per-iteration projection models in the outcome");
        }
    }

    ich::HarvestConfig build() const {
        ich::HarvestConfig c;
        c.n_pca = n_pca;
        c.n_c = n_c;
        c.n_min = n_min;
        c.silhouette_metric = ich::parse_silhouette_metric(metric);
        c.dimred_method = ich::parse_dimred_method(dimred);
        c.cluster_method = ich::parse_cluster_method(cluster);
        c.seed = seed;
        c.full_assign = full_assign;
        c.trace = trace;
        c.validate();
        return c;
    }
};

int cmd_generate(const std::string& classes, std::size_t size, std::uint64_t seed, const fs::path& out,
                 bool no_images, Manifest& manifest) {
    const auto counts = parse_class_counts(classes);
    fs::create_directories(out);
    std::optional<fs::path> images;
    if (!no_images) images = out / "images";
    const auto dataset = ich::generate_dataset(counts, size, seed, images);
    const auto feature_path = out / "features.ichf";
    ich::write_feature_file(dataset, feature_path);

    manifest.seed = seed;
    manifest.config = {{"classes", counts}, {"size", size}, {"seed", seed}, {"images", !no_images}};
    manifest.outputs.push_back(feature_path);
    if (images) {
        manifest.outputs.push_back(*images / "manifest.csv");
        for (const auto& [label, n] : counts)
            for (std::size_t i = 0; i < n; ++i) manifest.outputs.push_back(*images / ich::map_file_name(label, i, seed));
    }
    std::cout << "generated " << dataset.size() << " maps (" << size << "x" << size << ") -> " << feature_path.string()
              << "\n";
    return 0;
}

int cmd_run_ich(const ich::LabeledDataset& dataset, const ich::HarvestConfig& config, const fs::path& out,
                Manifest& manifest) {
    const auto outcome = ich::run_ich(dataset, config);
    for (const auto& r : outcome.state.log) {
        char line[256];
        std::snprintf(line, sizeof line, "iter %zu: remaining %zu, harvested size %zu, s_max %.6f, majority %s",
                      r.iteration, r.remaining, r.chosen_size, r.s_max,
                      r.majority_label ? r.majority_label->c_str() : "-");
        std::cout << line << "\n";
    }
    std::cout << "clusters " << outcome.n_clusters() << ", small " << outcome.state.small.size() << ", rest "
              << outcome.state.rest.size() << "\n";

    fs::create_directories(out);
    write_text(out / "outcome.json", ich::outcome_to_json(outcome, dataset).dump(2) + "\n");
    ich::write_assignment_csv(out / "assignment.csv", ich::assignment_rows(outcome, dataset));
    manifest.outputs = {out / "outcome.json", out / "assignment.csv"};
    return 0;
}

int cmd_run_otc(const ich::LabeledDataset& dataset, const ich::HarvestConfig& config, std::size_t k,
                bool dendrogram, const fs::path& out, Manifest& manifest) {
    const auto a = ich::run_otc(dataset, config, k);
    fs::create_directories(out);
    json clusters = json::array();
    for (std::size_t c = 0; c < a.k(); ++c)
        clusters.push_back({{"id", c}, {"members", ich::ids_of(dataset, a.members().compose(a.local_members_of(c)))}});
    json j{{"method", "otc"}, {"config", ich::config_to_json(config)}, {"k", a.k()}, {"clusters", clusters}};
    write_text(out / "outcome.json", j.dump(2) + "\n");
    ich::write_assignment_csv(out / "assignment.csv", ich::assignment_rows(a, dataset));
    manifest.outputs = {out / "outcome.json", out / "assignment.csv"};
    if (dendrogram && config.cluster_method == ich::ClusterMethod::ward) {
        const auto model = ich::fit_projection(dataset.features(), config.dimred_method, config.n_pca);
        const auto merges = ich::ward_dendrogram(ich::project(model, dataset.features()));
        write_text(out / "dendrogram.json", ich::dendrogram_to_json(merges).dump(1) + "\n");
        manifest.outputs.push_back(out / "dendrogram.json");
    }
    std::cout << "otc: " << a.k() << " clusters over " << a.size() << " samples\n";
    return 0;
}

int cmd_evaluate(const fs::path& assignment, const fs::path& features, const std::string& metric,
                 const fs::path& out, Manifest& manifest) {
    const auto dataset = ich::load_features(features);
    if (!dataset.has_labels()) throw ich::ConfigError("evaluation needs a labeled feature file");
    const auto rows = ich::read_assignment_csv(assignment);
    std::optional<ich::SilhouetteMetric> m;
    if (metric != "none") m = ich::parse_silhouette_metric(metric);
    const auto report = ich::evaluate(dataset, rows, m);
    fs::create_directories(out);
    write_text(out / "evaluation.json", ich::evaluation_to_json(report).dump(2) + "\n");
    ich::write_confusion_csv(out / "confusion.csv", report.confusion);
    manifest.outputs = {out / "evaluation.json", out / "confusion.csv"};
    std::printf("homogeneity %.6f over %zu samples in %zu clusters\n", report.homogeneity, report.n_samples,
                report.cluster_ids.size());
    return 0;
}

int cmd_report(const fs::path& outcome_path, const fs::path& features, const fs::path& out, Manifest& manifest) {
    const auto dataset = ich::load_features(features);
    std::ifstream in(outcome_path);
    if (!in) throw ich::DataError("cannot open '" + outcome_path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ich::DataError(std::string("malformed outcome JSON: ") + e.what());
    }
    if (!j.contains("iterations")) throw ich::DataError("not a harvesting outcome (no iterations)");
    const auto outcome = ich::outcome_from_json(j, dataset);
    const auto summary = ich::write_report(outcome, dataset, out);
    manifest.outputs = summary.files;
    if (!summary.has_projection) std::cout << "no trace data in outcome; component panels skipped\n";
    std::cout << "report: " << summary.n_panels << " component panels, " << summary.n_mean_images
              << " mean images\n";
    return 0;
}

int cmd_compare(const ich::LabeledDataset& dataset, const ich::HarvestConfig& config,
                const std::optional<fs::path>& pixels, const fs::path& out, Manifest& manifest) {
    std::optional<ich::FeatureMatrix> pixel_features;
    if (pixels) {
        auto p = ich::load_features(*pixels);
        if (p.sample_ids() != dataset.sample_ids())
            throw ich::DataError("pixel file must list the same samples in the same order");
        pixel_features = p.features();
        manifest.inputs.push_back(*pixels);
    }
    const auto report = ich::compare_runs(dataset, config, ich::default_baselines(config, pixel_features));
    fs::create_directories(out);
    write_text(out / "benchmark.json", ich::benchmark_to_json(report).dump(2) + "\n");
    {
        std::ofstream csv(out / "benchmark.csv", std::ios::trunc);
        csv << "method,n_clusters,partial,full\n";
        for (const auto& r : report.rows)
            csv << r.method << ',' << r.n_clusters << ',' << json(r.h_partial).dump() << ',' << json(r.h_full).dump()
                << '\n';
    }
    manifest.outputs = {out / "benchmark.json", out / "benchmark.csv"};
    std::printf("%-8s %10s %10s\n", "method", "partial", "full");
    for (const auto& r : report.rows) std::printf("%-8s %10.4f %10.4f\n", r.method.c_str(), r.h_partial, r.h_full);
    if (report.delta_rel_full)
        std::printf("delta_rel (ICH vs OTC): partial %+.1f%%, full %+.1f%%\n",
                    100.0 * report.delta_rel_partial.value_or(0.0), 100.0 * *report.delta_rel_full);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Iterative cluster harvesting"};
    app.require_subcommand(1);

    Manifest manifest;
    for (int i = 0; i < argc; ++i) manifest.argv.emplace_back(argv[i]);
    fs::path out;

    auto* gen = app.add_subcommand("generate", "generate a synthetic wafer-map dataset");
    std::string classes;
    std::size_t size = 64;
    std::uint64_t gen_seed = 0;
    bool no_images = false;
    gen->add_option("--classes", classes, "Label=N list, e.g. Center=40,Ring=40 (or all=N)")->required();
    gen->add_option("--size", size, "map side length")->capture_default_str();
    gen->add_option("--seed", gen_seed, "dataset seed")->capture_default_str();
    gen->add_flag("--no-images", no_images, "skip the PNG archive");
    gen->add_option("--out", out, "output directory")->required();

    auto* run = app.add_subcommand("run", "run ICH or one-time clustering");
    std::string mode;
    fs::path features;
    std::size_t k_total = 0;
    bool dendrogram = false;
    ConfigFlags flags;
    run->add_option("mode", mode, "ich or otc")->required()->check(CLI::IsMember({"ich", "otc"}));
    run->add_option("features", features, "feature file (.ichf or .csv)")->required();
    run->add_option("--k", k_total, "total clusters (otc)");
    run->add_flag("--dendrogram", dendrogram, "also dump the Ward dendrogram (otc)");
    flags.attach(run, true);
    run->add_option("--out", out, "output directory")->required();

    auto* eval = app.add_subcommand("evaluate", "score an assignment CSV against labels");
    fs::path assignment;
    std::string eval_metric = "cosine";
    eval->add_option("assignment", assignment, "assignment CSV")->required();
    eval->add_option("features", features, "labeled feature file")->required();
    eval->add_option("--silhouette-metric", eval_metric, "cosine, euclidean or none")->capture_default_str();
    eval->add_option("--out", out, "output directory")->required();

    auto* rep = app.add_subcommand("report", "component histograms and mean images for an ICH outcome");
    fs::path outcome_path;
    rep->add_option("outcome", outcome_path, "outcome.json from 'run ich'")->required();
    rep->add_option("features", features, "feature file")->required();
    rep->add_option("--out", out, "output directory")->required();

    auto* cmp = app.add_subcommand("compare", "benchmark ICH against one-time baselines");
    std::optional<fs::path> pixels;
    ConfigFlags cmp_flags;
    cmp->add_option("features", features, "labeled feature file")->required();
    cmp->add_option("--pixels", pixels, "raw-pixel feature file for the PCA+AC baseline");
    cmp_flags.attach(cmp, false);
    cmp->add_option("--out", out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        int rc = 0;
        if (gen->parsed()) {
            manifest.command = "generate";
            rc = cmd_generate(classes, size, gen_seed, out, no_images, manifest);
        } else if (run->parsed()) {
            manifest.command = "run " + mode;
            const auto config = flags.build();
            manifest.config = ich::config_to_json(config);
            manifest.seed = config.seed;
            manifest.inputs.push_back(features);
            const auto dataset = ich::load_features(features);
            if (dataset.size() == 0) throw ich::DataError("empty dataset");
            if (mode == "ich") {
                rc = cmd_run_ich(dataset, config, out, manifest);
            } else {
                if (k_total == 0) throw ich::ConfigError("otc needs --k");
                if (k_total > dataset.size())
                    throw ich::ConfigError("--k " + std::to_string(k_total) + " exceeds sample count " +
                                           std::to_string(dataset.size()));
                manifest.config["k_total"] = k_total;
                rc = cmd_run_otc(dataset, config, k_total, dendrogram, out, manifest);
            }
        } else if (eval->parsed()) {
            manifest.command = "evaluate";
            manifest.inputs = {assignment, features};
            rc = cmd_evaluate(assignment, features, eval_metric, out, manifest);
        } else if (rep->parsed()) {
            manifest.command = "report";
            manifest.inputs = {outcome_path, features};
            rc = cmd_report(outcome_path, features, out, manifest);
        } else if (cmp->parsed()) {
            manifest.command = "compare";
            const auto config = cmp_flags.build();
            manifest.config = ich::config_to_json(config);
            manifest.seed = config.seed;
            manifest.inputs.push_back(features);
            const auto dataset = ich::load_features(features);
            if (dataset.size() == 0) throw ich::DataError("empty dataset");
            if (!dataset.has_labels()) throw ich::ConfigError("compare needs a labeled feature file");
            rc = cmd_compare(dataset, config, pixels, out, manifest);
        }
        manifest.write(out);
        return rc;
    } catch (const ich::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}
