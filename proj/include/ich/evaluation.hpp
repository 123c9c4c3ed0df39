#pragma once

// Evaluation of an assignment against true labels, and the assignment CSV
// format (sample_id,cluster_id,assigned_stage).

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ich/feature_io.hpp"
#include "ich/harvest.hpp"
#include "ich/quality.hpp"
#include "ich/serialize.hpp"

namespace ich {

struct AssignmentRow {
    std::string sample_id;
    std::size_t cluster = 0;
    std::string stage = "harvest";
};

/// Rows for every assigned sample, in dataset order. Without a final
/// assignment only surviving harvested clusters are listed.
inline std::vector<AssignmentRow> assignment_rows(const HarvestOutcome& o, const LabeledDataset& d) {
    std::vector<AssignmentRow> rows;
    if (o.final_assignment) {
        for (std::size_t i = 0; i < d.size(); ++i)
            rows.push_back({d.sample_ids()[i], o.final_assignment->cluster_of[i], to_string(o.final_assignment->stage[i])});
        return rows;
    }
    const ClusterAssignment partial = partial_assignment(o.state);
    for (std::size_t i = 0; i < partial.size(); ++i)
        rows.push_back({d.sample_ids()[partial.members()[i]], partial.cluster_of()[i], "harvest"});
    return rows;
}

inline std::vector<AssignmentRow> assignment_rows(const ClusterAssignment& a, const LabeledDataset& d) {
    std::vector<AssignmentRow> rows;
    for (std::size_t i = 0; i < a.size(); ++i) rows.push_back({d.sample_ids()[a.members()[i]], a.cluster_of()[i], "harvest"});
    return rows;
}

inline void write_assignment_csv(const std::filesystem::path& path, const std::vector<AssignmentRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "sample_id,cluster_id,assigned_stage\n";
    for (const auto& r : rows) out << r.sample_id << ',' << r.cluster << ',' << r.stage << '\n';
}

inline std::vector<AssignmentRow> read_assignment_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty assignment CSV");
    const auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header[0] != "sample_id" || header[1] != "cluster_id")
        throw DataError("assignment CSV header must start with sample_id,cluster_id");
    std::vector<AssignmentRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() < 2) throw DataError("assignment CSV line " + std::to_string(line_no) + " is short");
        AssignmentRow r;
        r.sample_id = f[0];
        try {
            std::size_t used = 0;
            const long long c = std::stoll(f[1], &used);
            if (used != f[1].size() || c < 0) throw std::invalid_argument("bad");
            r.cluster = static_cast<std::size_t>(c);
        } catch (const std::exception&) {
            throw DataError("assignment CSV line " + std::to_string(line_no) + ": bad cluster id '" + f[1] + "'");
        }
        if (f.size() > 2) r.stage = f[2];
        rows.push_back(std::move(r));
    }
    return rows;
}

struct EvaluationReport {
    double homogeneity = 0.0;
    std::size_t n_samples = 0;
    std::vector<std::size_t> cluster_ids;  ///< original ids, column order of the table
    std::optional<std::vector<double>> per_cluster_silhouette;
    MajorityConfusion confusion;
};

/// Scores the assigned samples only (partial assignments are evaluated on
/// what they cover). Silhouettes are computed in `d`'s feature space when
/// there are at least two clusters.
inline EvaluationReport evaluate(const LabeledDataset& d, const std::vector<AssignmentRow>& rows,
                                 std::optional<SilhouetteMetric> metric = SilhouetteMetric::cosine) {
    if (!d.labels()) throw DataError("evaluation needs labels");
    if (rows.empty()) throw DataError("assignment is empty");
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < d.size(); ++i) index.emplace(d.sample_ids()[i], i);

    std::map<std::size_t, std::size_t> dense;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (sample index, raw cluster)
    for (const auto& r : rows) {
        auto it = index.find(r.sample_id);
        if (it == index.end()) throw DataError("assignment refers to unknown sample '" + r.sample_id + "'");
        pairs.emplace_back(it->second, r.cluster);
        dense.emplace(r.cluster, 0);
    }
    EvaluationReport rep;
    for (auto& [raw, idx] : dense) {
        idx = rep.cluster_ids.size();
        rep.cluster_ids.push_back(raw);
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<std::size_t> members, clusters;
    std::vector<std::string> labels;
    for (auto [idx, raw] : pairs) {
        if (!members.empty() && members.back() == idx) throw DataError("sample assigned twice: '" + d.sample_ids()[idx] + "'");
        members.push_back(idx);
        clusters.push_back(dense[raw]);
        labels.push_back((*d.labels())[idx]);
    }
    rep.n_samples = members.size();
    const auto table = ContingencyTable::from_labels(labels, clusters);
    rep.homogeneity = homogeneity(table);
    rep.confusion = majority_confusion(table);
    if (metric && rep.cluster_ids.size() >= 2) {
        const ClusterAssignment a(IndexSubset(members), clusters, rep.cluster_ids.size());
        rep.per_cluster_silhouette = silhouette(d.features(), a, *metric).per_cluster;
    }
    return rep;
}

inline json evaluation_to_json(const EvaluationReport& r) {
    json per_cluster = nullptr;
    if (r.per_cluster_silhouette) {
        per_cluster = json::object();
        for (std::size_t c = 0; c < r.cluster_ids.size(); ++c)
            per_cluster[std::to_string(r.cluster_ids[c])] = (*r.per_cluster_silhouette)[c];
    }
    json predicted = json::object();
    for (std::size_t c = 0; c < r.cluster_ids.size(); ++c)
        predicted[std::to_string(r.cluster_ids[c])] = r.confusion.classes[r.confusion.predicted_class[c]];
    return {{"homogeneity", r.homogeneity},
            {"n_samples", r.n_samples},
            {"n_clusters", r.cluster_ids.size()},
            {"per_cluster_silhouette", per_cluster},
            {"confusion",
             {{"classes", r.confusion.classes},
              {"matrix", r.confusion.matrix},
              {"clusters_per_class", r.confusion.clusters_per_class},
              {"predicted_label", predicted}}}};
}

/// Confusion matrix as CSV: header "true\\predicted,<classes...>", then one
/// row per true class, then a clusters_per_class row.
inline void write_confusion_csv(const std::filesystem::path& path, const MajorityConfusion& c) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "true\\predicted";
    for (const auto& name : c.classes) out << ',' << name;
    out << '\n';
    for (std::size_t t = 0; t < c.classes.size(); ++t) {
        out << c.classes[t];
        for (double v : c.matrix[t]) out << ',' << json(v).dump();
        out << '\n';
    }
    out << "clusters_per_class";
    for (std::size_t v : c.clusters_per_class) out << ',' << v;
    out << '\n';
}

}  // namespace ich
