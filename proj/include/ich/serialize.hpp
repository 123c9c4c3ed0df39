#pragma once

// JSON forms of models, dendrograms, harvest outcomes and benchmark reports.

#include <json.hpp>

#include <unordered_map>

#include "ich/cluster.hpp"
#include "ich/dimred.hpp"
#include "ich/harvest.hpp"

namespace ich {

using json = nlohmann::json;

inline json config_to_json(const HarvestConfig& c) {
    return {{"n_pca", c.n_pca},
            {"n_c", c.n_c},
            {"n_min", c.n_min},
            {"silhouette_metric", to_string(c.silhouette_metric)},
            {"dimred", to_string(c.dimred_method)},
            {"cluster", to_string(c.cluster_method)},
            {"seed", c.seed},
            {"full_assign", c.full_assign},
            {"trace", c.trace}};
}

inline HarvestConfig config_from_json(const json& j) {
    HarvestConfig c;
    c.n_pca = j.at("n_pca").get<std::size_t>();
    c.n_c = j.at("n_c").get<std::size_t>();
    c.n_min = j.at("n_min").get<std::size_t>();
    c.silhouette_metric = parse_silhouette_metric(j.at("silhouette_metric").get<std::string>());
    c.dimred_method = parse_dimred_method(j.at("dimred").get<std::string>());
    c.cluster_method = parse_cluster_method(j.at("cluster").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    c.full_assign = j.value("full_assign", false);
    c.trace = j.value("trace", false);
    return c;
}

inline json matrix_to_json(const FeatureMatrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    return rows;
}

inline json model_to_json(const ProjectionModel& m) {
    json j{{"method", to_string(m.method)},
           {"k", m.k()},
           {"input_dims", m.input_dims},
           {"explained_variance", m.explained_variance},
           {"total_variance", m.total_variance},
           {"explained_ratio", m.explained_ratio()}};
    j["mean"] = m.mean ? json(*m.mean) : json(nullptr);
    j["components"] = m.method == DimredMethod::none ? json(nullptr) : matrix_to_json(m.components);
    return j;
}

inline ProjectionModel model_from_json(const json& j) {
    ProjectionModel m;
    m.method = parse_dimred_method(j.at("method").get<std::string>());
    m.input_dims = j.at("input_dims").get<std::size_t>();
    m.explained_variance = j.at("explained_variance").get<std::vector<double>>();
    m.total_variance = j.at("total_variance").get<double>();
    if (!j.at("mean").is_null()) m.mean = j.at("mean").get<std::vector<double>>();
    if (!j.at("components").is_null()) {
        const auto rows = j.at("components").get<std::vector<std::vector<double>>>();
        std::vector<double> flat;
        for (const auto& r : rows) {
            if (r.size() != m.input_dims) throw DataError("component width does not match input_dims");
            flat.insert(flat.end(), r.begin(), r.end());
        }
        m.components = FeatureMatrix(rows.size(), m.input_dims, std::move(flat));
    }
    return m;
}

inline json dendrogram_to_json(const std::vector<MergeStep>& merges) {
    json out = json::array();
    for (const auto& s : merges)
        out.push_back({{"left", s.left_cluster},
                       {"right", s.right_cluster},
                       {"cost", s.merge_cost},
                       {"node", s.new_node},
                       {"size", s.new_size}});
    return out;
}

inline json ids_of(const LabeledDataset& d, const IndexSubset& s) {
    json out = json::array();
    for (std::size_t i : s) out.push_back(d.sample_ids()[i]);
    return out;
}

/// Outcome with cluster membership expressed by sample id.
inline json outcome_to_json(const HarvestOutcome& o, const LabeledDataset& d) {
    json j;
    j["config"] = config_to_json(o.config);
    j["n_samples"] = d.size();
    j["n_clusters"] = o.n_clusters();

    json iters = json::array();
    for (const auto& r : o.state.log) {
        json it{{"iteration", r.iteration},
                {"remaining", r.remaining},
                {"effective_dims", r.effective_dims},
                {"n_clusters", r.n_clusters},
                {"chosen_cluster", r.chosen_cluster},
                {"chosen_size", r.chosen_size},
                {"s_max", r.s_max}};
        it["majority_label"] = r.majority_label ? json(*r.majority_label) : json(nullptr);
        iters.push_back(std::move(it));
    }
    j["iterations"] = std::move(iters);

    json clusters = json::array();
    for (std::size_t c = 0; c < o.state.harvested.size(); ++c)
        clusters.push_back({{"id", c},
                            {"iteration", o.state.harvested[c].iteration},
                            {"members", ids_of(d, o.state.harvested[c].members)}});
    j["clusters"] = std::move(clusters);
    json small = json::array();
    for (const auto& s : o.state.small)
        small.push_back({{"iteration", s.iteration}, {"members", ids_of(d, s.members)}});
    j["small"] = std::move(small);
    j["rest"] = ids_of(d, o.state.rest);

    if (o.final_assignment) {
        json fa = json::object();
        for (std::size_t i = 0; i < d.size(); ++i)
            fa[d.sample_ids()[i]] = {{"cluster", o.final_assignment->cluster_of[i]},
                                     {"stage", to_string(o.final_assignment->stage[i])}};
        j["final_assignment"] = std::move(fa);
    } else {
        j["final_assignment"] = nullptr;
    }

    if (o.trace) {
        json tr = json::array();
        for (const auto& t : *o.trace) tr.push_back({{"remaining", ids_of(d, t.remaining)}, {"model", model_to_json(t.model)}});
        j["trace"] = std::move(tr);
    } else {
        j["trace"] = nullptr;
    }
    return j;
}

/// Inverse of outcome_to_json; sample ids are resolved against `d`.
inline HarvestOutcome outcome_from_json(const json& j, const LabeledDataset& d) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < d.size(); ++i) index.emplace(d.sample_ids()[i], i);
    auto resolve = [&](const json& ids) {
        std::vector<std::size_t> out;
        for (const auto& id : ids) {
            auto it = index.find(id.get<std::string>());
            if (it == index.end()) throw DataError("outcome refers to unknown sample id '" + id.get<std::string>() + "'");
            out.push_back(it->second);
        }
        return IndexSubset::from_unsorted(std::move(out));
    };

    HarvestOutcome o;
    o.config = config_from_json(j.at("config"));
    for (const auto& it : j.at("iterations")) {
        IterationRecord r;
        r.iteration = it.at("iteration").get<std::size_t>();
        r.remaining = it.at("remaining").get<std::size_t>();
        r.effective_dims = it.at("effective_dims").get<std::size_t>();
        r.n_clusters = it.at("n_clusters").get<std::size_t>();
        r.chosen_cluster = it.at("chosen_cluster").get<std::size_t>();
        r.chosen_size = it.at("chosen_size").get<std::size_t>();
        r.s_max = it.at("s_max").get<double>();
        if (!it.at("majority_label").is_null()) r.majority_label = it.at("majority_label").get<std::string>();
        o.state.log.push_back(r);
    }
    for (const auto& c : j.at("clusters"))
        o.state.harvested.push_back({resolve(c.at("members")), c.at("iteration").get<std::size_t>()});
    for (const auto& s : j.at("small"))
        o.state.small.push_back({resolve(s.at("members")), s.at("iteration").get<std::size_t>()});
    o.state.rest = resolve(j.at("rest"));

    if (!j.at("final_assignment").is_null()) {
        FinalAssignment fa;
        fa.cluster_of.assign(d.size(), 0);
        fa.stage.assign(d.size(), AssignStage::harvest);
        for (const auto& [id, v] : j.at("final_assignment").items()) {
            auto it = index.find(id);
            if (it == index.end()) throw DataError("outcome refers to unknown sample id '" + id + "'");
            fa.cluster_of[it->second] = v.at("cluster").get<std::size_t>();
            const auto stage = v.at("stage").get<std::string>();
            fa.stage[it->second] = stage == "nn-rest"    ? AssignStage::nn_rest
                                   : stage == "nn-small" ? AssignStage::nn_small
                                                         : AssignStage::harvest;
        }
        o.final_assignment = std::move(fa);
    }
    if (j.contains("trace") && !j.at("trace").is_null()) {
        o.trace.emplace();
        for (const auto& t : j.at("trace")) o.trace->push_back({resolve(t.at("remaining")), model_from_json(t.at("model"))});
    }
    return o;
}

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

/// Benchmark table: one row per method with partial / full homogeneity,
/// plus relative improvement of ICH over OTC.
inline json benchmark_to_json(const BenchmarkReport& r) {
    json rows = json::array();
    for (const auto& m : r.rows)
        rows.push_back({{"method", m.method}, {"n_clusters", m.n_clusters}, {"partial", m.h_partial}, {"full", m.h_full}});
    return {{"n_clusters", r.n_clusters},
            {"n_partial_samples", r.n_partial_samples},
            {"methods", std::move(rows)},
            {"delta_rel", {{"partial", optional_number(r.delta_rel_partial)}, {"full", optional_number(r.delta_rel_full)}}}};
}

}  // namespace ich
