#pragma once

// Iterative cluster harvesting and the one-time clustering baselines.
//
// Each iteration fits a fresh projection on the remaining samples, clusters
// the projected rows, and removes the cluster with the highest mean
// silhouette. Iteration stops once no more than n_pca samples remain.

#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ich/cluster.hpp"
#include "ich/core.hpp"
#include "ich/dimred.hpp"
#include "ich/quality.hpp"
#include "ich/random.hpp"

namespace ich {

struct HarvestedCluster {
    IndexSubset members;  ///< indices into the original dataset
    std::size_t iteration = 0;
};

struct IterationRecord {
    std::size_t iteration = 0;
    std::size_t remaining = 0;       ///< |F'| at the start of the iteration
    std::size_t effective_dims = 0;  ///< components actually used
    std::size_t n_clusters = 0;      ///< clusters formed this iteration
    std::size_t chosen_cluster = 0;
    double s_max = 0.0;              ///< 0 when only one cluster could be formed
    std::size_t chosen_size = 0;
    std::optional<std::string> majority_label;
};

struct HarvestState {
    std::vector<HarvestedCluster> harvested;  ///< surviving clusters (size >= n_min)
    IndexSubset rest;
    std::vector<HarvestedCluster> small;
    std::vector<IterationRecord> log;
};

enum class AssignStage { harvest, nn_rest, nn_small };

inline std::string to_string(AssignStage s) {
    switch (s) {
        case AssignStage::harvest: return "harvest";
        case AssignStage::nn_rest: return "nn-rest";
        case AssignStage::nn_small: return "nn-small";
    }
    return "?";
}

/// Final cluster of every sample after nearest-neighbor assignment.
struct FinalAssignment {
    std::vector<std::size_t> cluster_of;  ///< per dataset index
    std::vector<AssignStage> stage;       ///< per dataset index
};

/// Per-iteration projection, kept only when tracing.
struct IterationTrace {
    IndexSubset remaining;
    ProjectionModel model;
};

struct HarvestOutcome {
    HarvestConfig config;
    HarvestState state;
    std::optional<FinalAssignment> final_assignment;
    std::optional<std::vector<IterationTrace>> trace;

    std::size_t n_clusters() const noexcept { return state.harvested.size(); }
};

/// Most frequent label among `members`; lexicographically smallest on ties.
inline std::string majority_label(const std::vector<std::string>& labels, const IndexSubset& members) {
    std::map<std::string, std::size_t> counts;
    for (std::size_t i : members) ++counts[labels[i]];
    std::string best;
    std::size_t best_count = 0;
    for (const auto& [label, count] : counts)
        if (count > best_count) {
            best = label;
            best_count = count;
        }
    return best;
}

/// Reduce then cluster once; the building block of every iteration and of
/// the one-time baselines.
inline ClusterAssignment reduce_and_cluster(const FeatureMatrix& features, const HarvestConfig& config,
                                            std::size_t k, std::uint64_t seed,
                                            ProjectionModel* model_out = nullptr,
                                            FeatureMatrix* projected_out = nullptr) {
    ProjectionModel model = fit_projection(features, config.dimred_method, config.n_pca);
    FeatureMatrix projected = project(model, features);
    ClusterAssignment assignment = config.cluster_method == ClusterMethod::ward
                                       ? ward_cluster(projected, k)
                                       : kmeans_cluster(projected, k, seed);
    if (model_out) *model_out = std::move(model);
    if (projected_out) *projected_out = std::move(projected);
    return assignment;
}

/// Assigns rest and small members to the surviving clusters by their nearest
/// harvested neighbor in the original feature space.
inline FinalAssignment assign_leftovers(const LabeledDataset& dataset, const HarvestState& state) {
    if (state.harvested.empty()) throw DataError("no surviving clusters to assign to");
    const std::size_t n = dataset.size();
    FinalAssignment out;
    out.cluster_of.assign(n, 0);
    out.stage.assign(n, AssignStage::harvest);

    std::vector<std::size_t> anchor_ids;
    std::vector<std::size_t> anchor_clusters;
    for (std::size_t c = 0; c < state.harvested.size(); ++c)
        for (std::size_t idx : state.harvested[c].members) {
            anchor_ids.push_back(idx);
            anchor_clusters.push_back(c);
            out.cluster_of[idx] = c;
        }
    // Anchors in sample order so ties resolve to the lowest sample index.
    std::vector<std::size_t> order(anchor_ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return anchor_ids[a] < anchor_ids[b]; });
    std::vector<std::size_t> sorted_ids, sorted_clusters;
    for (std::size_t o : order) {
        sorted_ids.push_back(anchor_ids[o]);
        sorted_clusters.push_back(anchor_clusters[o]);
    }
    const FeatureMatrix anchors = subset_rows(dataset.features(), IndexSubset(sorted_ids));

    std::vector<std::size_t> orphan_ids(state.rest.begin(), state.rest.end());
    std::vector<AssignStage> orphan_stage(orphan_ids.size(), AssignStage::nn_rest);
    for (const auto& s : state.small)
        for (std::size_t idx : s.members) {
            orphan_ids.push_back(idx);
            orphan_stage.push_back(AssignStage::nn_small);
        }
    std::vector<std::size_t> order_o(orphan_ids.size());
    std::iota(order_o.begin(), order_o.end(), std::size_t{0});
    std::sort(order_o.begin(), order_o.end(), [&](auto a, auto b) { return orphan_ids[a] < orphan_ids[b]; });
    std::vector<std::size_t> sorted_orphans;
    for (std::size_t o : order_o) sorted_orphans.push_back(orphan_ids[o]);
    const FeatureMatrix orphans = subset_rows(dataset.features(), IndexSubset(sorted_orphans));

    const auto assigned = nearest_neighbor_assign(anchors, sorted_ids, sorted_clusters, orphans);
    for (std::size_t i = 0; i < order_o.size(); ++i) {
        out.cluster_of[sorted_orphans[i]] = assigned[i];
        out.stage[sorted_orphans[i]] = orphan_stage[order_o[i]];
    }
    return out;
}

/// Runs iterative cluster harvesting on `dataset`.
inline HarvestOutcome run_ich(const LabeledDataset& dataset, const HarvestConfig& config) {
    config.validate();
    if (dataset.size() == 0) throw DataError("empty dataset");

    HarvestOutcome outcome;
    outcome.config = config;
    if (config.trace) outcome.trace.emplace();

    std::vector<HarvestedCluster> harvested;
    IndexSubset remaining = IndexSubset::all(dataset.size());
    std::size_t iteration = 0;
    while (remaining.size() > config.n_pca) {
        const FeatureMatrix sub = subset_rows(dataset.features(), remaining);
        const std::size_t k = std::min(config.n_c, remaining.size());
        ProjectionModel model;
        FeatureMatrix projected;
        const ClusterAssignment assignment =
            reduce_and_cluster(sub, config, k, mix_seed(config.seed, iteration), &model, &projected);

        IterationRecord rec;
        rec.iteration = iteration;
        rec.remaining = remaining.size();
        rec.effective_dims = model.k();
        rec.n_clusters = assignment.k();
        if (assignment.k() >= 2) {
            const SilhouetteReport sil = silhouette(projected, assignment, config.silhouette_metric);
            rec.chosen_cluster = sil.best_cluster;
            rec.s_max = sil.best_score();
        }
        const IndexSubset chosen = remaining.compose(assignment.local_members_of(rec.chosen_cluster));
        rec.chosen_size = chosen.size();
        if (dataset.labels()) rec.majority_label = majority_label(*dataset.labels(), chosen);

        if (outcome.trace) outcome.trace->push_back({remaining, std::move(model)});
        outcome.state.log.push_back(rec);
        harvested.push_back({chosen, iteration});
        remaining = remaining.minus(chosen);
        ++iteration;
    }
    outcome.state.rest = std::move(remaining);

    for (auto& h : harvested) {
        if (h.members.size() < config.n_min)
            outcome.state.small.push_back(std::move(h));
        else
            outcome.state.harvested.push_back(std::move(h));
    }

    if (config.full_assign) outcome.final_assignment = assign_leftovers(dataset, outcome.state);
    return outcome;
}

/// Surviving harvested clusters as an assignment over their members only.
inline ClusterAssignment partial_assignment(const HarvestState& state) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t c = 0; c < state.harvested.size(); ++c)
        for (std::size_t idx : state.harvested[c].members) pairs.emplace_back(idx, c);
    std::sort(pairs.begin(), pairs.end());
    std::vector<std::size_t> members, clusters;
    for (auto [idx, c] : pairs) {
        members.push_back(idx);
        clusters.push_back(c);
    }
    return ClusterAssignment(IndexSubset(std::move(members)), std::move(clusters), state.harvested.size());
}

/// One-time clustering into exactly k_total clusters (canonical ids).
inline ClusterAssignment run_otc(const LabeledDataset& dataset, const HarvestConfig& config, std::size_t k_total) {
    if (dataset.size() == 0) throw DataError("empty dataset");
    if (k_total < 1 || k_total > dataset.size())
        throw ConfigError("k_total " + std::to_string(k_total) + " out of range [1, " +
                          std::to_string(dataset.size()) + "]");
    return reduce_and_cluster(dataset.features(), config, k_total, config.seed);
}

// ---------------------------------------------------------------------------
// Benchmarking against one-time baselines

/// A one-time baseline. `features`, when set, replaces the dataset's
/// features (e.g. raw pixels for PCA+AC); it must have the same sample order.
struct Baseline {
    std::string name;
    DimredMethod dimred = DimredMethod::pca;
    ClusterMethod cluster = ClusterMethod::ward;
    std::optional<FeatureMatrix> features;
};

/// OTC with the run's own reduction and clustering, CNN+AC (no reduction)
/// and PCA+AC (on `pixels` when given, otherwise on the input features).
inline std::vector<Baseline> default_baselines(const HarvestConfig& config,
                                               std::optional<FeatureMatrix> pixels = std::nullopt) {
    return {
        {"OTC", config.dimred_method, config.cluster_method, std::nullopt},
        {"CNN+AC", DimredMethod::none, ClusterMethod::ward, std::nullopt},
        {"PCA+AC", DimredMethod::pca, ClusterMethod::ward, std::move(pixels)},
    };
}

struct MethodScore {
    std::string method;
    std::size_t n_clusters = 0;
    double h_partial = 0.0;
    double h_full = 0.0;
};

struct BenchmarkReport {
    std::vector<MethodScore> rows;
    std::size_t n_clusters = 0;
    std::size_t n_partial_samples = 0;
    std::optional<double> delta_rel_partial;  ///< (h_ICH - h_OTC) / h_OTC
    std::optional<double> delta_rel_full;
};

inline double homogeneity_of(const std::vector<std::string>& labels, const IndexSubset& members,
                             const std::vector<std::size_t>& clusters) {
    std::vector<std::string> l;
    l.reserve(members.size());
    for (std::size_t idx : members) l.push_back(labels[idx]);
    return homogeneity(ContingencyTable::from_labels(l, clusters));
}

inline std::optional<double> relative_improvement(double h_new, double h_base) {
    if (h_base == 0.0) return std::nullopt;
    return (h_new - h_base) / h_base;
}

/// Runs ICH, then every baseline with ICH's surviving cluster count.
///
/// Partial scores cover the samples in surviving harvested clusters; each
/// baseline re-clusters exactly that subset. Full scores cover the whole
/// dataset (ICH via nearest-neighbor assignment).
inline BenchmarkReport compare_runs(const LabeledDataset& dataset, HarvestConfig config,
                                    const std::vector<Baseline>& baselines) {
    if (!dataset.labels()) throw DataError("comparison needs a labeled dataset");
    const auto& labels = *dataset.labels();
    config.full_assign = true;
    config.trace = false;
    const HarvestOutcome ich = run_ich(dataset, config);
    const std::size_t k = ich.n_clusters();

    BenchmarkReport report;
    report.n_clusters = k;
    const ClusterAssignment partial = partial_assignment(ich.state);
    report.n_partial_samples = partial.size();
    const IndexSubset everyone = IndexSubset::all(dataset.size());

    MethodScore ich_row{"ICH", k, homogeneity_of(labels, partial.members(), partial.cluster_of()),
                        homogeneity_of(labels, everyone, ich.final_assignment->cluster_of)};

    std::optional<MethodScore> otc_row;
    for (const auto& b : baselines) {
        HarvestConfig bc = config;
        bc.dimred_method = b.dimred;
        bc.cluster_method = b.cluster;
        const FeatureMatrix& feats = b.features ? *b.features : dataset.features();
        if (feats.rows() != dataset.size())
            throw DataError("baseline '" + b.name + "' features have the wrong number of rows");
        const LabeledDataset full(feats, dataset.sample_ids(), dataset.labels());
        const LabeledDataset filtered = subset_rows(full, partial.members());

        const ClusterAssignment a_full = run_otc(full, bc, k);
        const ClusterAssignment a_part = run_otc(filtered, bc, k);
        MethodScore row{b.name, k, homogeneity_of(labels, partial.members(), a_part.cluster_of()),
                        homogeneity_of(labels, everyone, a_full.cluster_of())};
        if (b.name == "OTC") otc_row = row;
        report.rows.push_back(row);
    }
    report.rows.push_back(ich_row);
    if (otc_row) {
        report.delta_rel_partial = relative_improvement(ich_row.h_partial, otc_row->h_partial);
        report.delta_rel_full = relative_improvement(ich_row.h_full, otc_row->h_full);
    }
    return report;
}

}  // namespace ich
