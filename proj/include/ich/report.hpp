#pragma once

// Inspection report for a harvesting run: histograms of the leading
// components of the first iteration's projection (colored by label),
// rendered as CSV and SVG, plus per-cluster mean images for datasets whose
// features are flattened square images.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ich/dimred.hpp"
#include "ich/harvest.hpp"
#include "ich/png.hpp"

namespace ich {

inline constexpr std::size_t kMaxReportComponents = 7;

struct ComponentHistogram {
    std::size_t component = 0;
    std::vector<double> edges;                 ///< bins + 1 edges
    std::vector<std::string> groups;           ///< label per series ("all" when unlabeled)
    std::vector<std::vector<std::size_t>> counts;  ///< [group][bin]
    std::optional<double> marker;              ///< e.g. mean of a highlighted cluster
};

/// Histograms of the first min(7, k) columns of `projected`.
inline std::vector<ComponentHistogram> component_histograms(const FeatureMatrix& projected,
                                                            const std::optional<std::vector<std::string>>& labels,
                                                            std::size_t bins = 30,
                                                            const std::optional<IndexSubset>& highlight = std::nullopt) {
    if (bins == 0) throw ConfigError("histogram needs at least one bin");
    std::vector<std::string> groups;
    std::map<std::string, std::size_t> group_of;
    if (labels) {
        for (const auto& l : *labels) group_of.emplace(l, 0);
        for (auto& [l, g] : group_of) {
            g = groups.size();
            groups.push_back(l);
        }
    } else {
        groups.push_back("all");
    }

    std::vector<ComponentHistogram> out;
    const std::size_t n_comp = std::min(kMaxReportComponents, projected.cols());
    for (std::size_t c = 0; c < n_comp; ++c) {
        ComponentHistogram h;
        h.component = c;
        double lo = 0.0, hi = 0.0;
        for (std::size_t i = 0; i < projected.rows(); ++i) {
            const double v = projected(i, c);
            if (i == 0 || v < lo) lo = v;
            if (i == 0 || v > hi) hi = v;
        }
        if (hi <= lo) hi = lo + 1.0;
        h.edges.resize(bins + 1);
        for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
        h.groups = groups;
        h.counts.assign(groups.size(), std::vector<std::size_t>(bins, 0));
        for (std::size_t i = 0; i < projected.rows(); ++i) {
            auto b = static_cast<std::size_t>((projected(i, c) - lo) / (hi - lo) * static_cast<double>(bins));
            b = std::min(b, bins - 1);
            const std::size_t g = labels ? group_of[(*labels)[i]] : 0;
            ++h.counts[g][b];
        }
        if (highlight && !highlight->empty()) {
            double s = 0.0;
            for (std::size_t i : *highlight) s += projected(i, c);
            h.marker = s / static_cast<double>(highlight->size());
        }
        out.push_back(std::move(h));
    }
    return out;
}

inline void write_histogram_csv(const std::filesystem::path& path, const std::vector<ComponentHistogram>& hists) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "component,bin_lo,bin_hi,label,count\n";
    for (const auto& h : hists)
        for (std::size_t g = 0; g < h.groups.size(); ++g)
            for (std::size_t b = 0; b + 1 < h.edges.size(); ++b)
                out << h.component << ',' << h.edges[b] << ',' << h.edges[b + 1] << ',' << h.groups[g] << ','
                    << h.counts[g][b] << '\n';
}

namespace detail {

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return colors[i % 10];
}

}  // namespace detail

/// One panel per component; bars of each label are overlaid with partial
/// opacity. The optional marker is drawn as a dashed vertical line.
inline std::string render_histogram_svg(const std::vector<ComponentHistogram>& hists) {
    const double width = 640, panel_h = 110, margin = 30, legend_h = 24;
    const double height = legend_h + panel_h * static_cast<double>(hists.size()) + margin;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    if (!hists.empty()) {
        const auto& groups = hists.front().groups;
        for (std::size_t g = 0; g < groups.size(); ++g)
            svg << "<text x=\"" << margin + 80.0 * static_cast<double>(g) << "\" y=\"16\" font-size=\"11\" fill=\""
                << detail::palette(g) << "\">" << groups[g] << "</text>\n";
    }
    for (std::size_t p = 0; p < hists.size(); ++p) {
        const auto& h = hists[p];
        const double top = legend_h + panel_h * static_cast<double>(p);
        const double plot_w = width - 2 * margin, plot_h = panel_h - 25;
        std::size_t peak = 1;
        for (const auto& series : h.counts)
            for (std::size_t c : series) peak = std::max(peak, c);
        const std::size_t bins = h.edges.size() - 1;
        const double bar_w = plot_w / static_cast<double>(bins);
        svg << "<g class=\"panel\" data-component=\"" << h.component << "\">\n";
        svg << "<text x=\"" << margin << "\" y=\"" << top + 10 << "\" font-size=\"11\">PC " << h.component + 1
            << "</text>\n";
        svg << "<rect x=\"" << margin << "\" y=\"" << top + 14 << "\" width=\"" << plot_w << "\" height=\"" << plot_h
            << "\" fill=\"none\" stroke=\"#999\"/>\n";
        for (std::size_t g = 0; g < h.counts.size(); ++g)
            for (std::size_t b = 0; b < bins; ++b) {
                if (h.counts[g][b] == 0) continue;
                const double bh = plot_h * static_cast<double>(h.counts[g][b]) / static_cast<double>(peak);
                svg << "<rect x=\"" << margin + bar_w * static_cast<double>(b) << "\" y=\"" << top + 14 + plot_h - bh
                    << "\" width=\"" << bar_w << "\" height=\"" << bh << "\" fill=\"" << detail::palette(g)
                    << "\" fill-opacity=\"0.45\"/>\n";
            }
        if (h.marker) {
            const double lo = h.edges.front(), hi = h.edges.back();
            const double x = margin + plot_w * (*h.marker - lo) / (hi - lo);
            svg << "<line x1=\"" << x << "\" y1=\"" << top + 14 << "\" x2=\"" << x << "\" y2=\"" << top + 14 + plot_h
                << "\" stroke=\"black\" stroke-dasharray=\"4 2\"/>\n";
        }
        svg << "</g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

/// Side length if `dims` is a perfect square, else nothing.
inline std::optional<std::size_t> square_side(std::size_t dims) {
    auto s = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(dims))));
    if (s * s == dims) return s;
    return std::nullopt;
}

/// Pixel-wise mean of the rows in `members`.
inline std::vector<double> mean_image(const FeatureMatrix& features, const IndexSubset& members) {
    std::vector<double> mean(features.cols(), 0.0);
    for (std::size_t i : members) {
        auto r = features.row(i);
        for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += r[j];
    }
    if (!members.empty())
        for (double& v : mean) v /= static_cast<double>(members.size());
    return mean;
}

struct ReportSummary {
    bool has_projection = false;
    std::size_t n_panels = 0;
    std::size_t n_mean_images = 0;
    std::vector<std::filesystem::path> files;
};

/// Writes the report files into `out_dir`.
///
/// The component panels need the first iteration's projection model, which
/// is only stored in traced outcomes; otherwise only the cluster summary and
/// mean images are produced.
inline ReportSummary write_report(const HarvestOutcome& o, const LabeledDataset& d, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    ReportSummary summary;

    {
        const auto path = out_dir / "clusters.csv";
        std::ofstream out(path, std::ios::trunc);
        out << "cluster_id,iteration,size,majority_label\n";
        for (std::size_t c = 0; c < o.state.harvested.size(); ++c) {
            const auto& h = o.state.harvested[c];
            out << c << ',' << h.iteration << ',' << h.members.size() << ','
                << (d.labels() ? majority_label(*d.labels(), h.members) : std::string()) << '\n';
        }
        summary.files.push_back(path);
    }

    if (o.trace && !o.trace->empty()) {
        const auto& first = o.trace->front();
        const FeatureMatrix projected = project(first.model, subset_rows(d.features(), first.remaining));
        std::optional<std::vector<std::string>> labels;
        if (d.labels()) {
            labels.emplace();
            for (std::size_t i : first.remaining) labels->push_back((*d.labels())[i]);
        }
        // Highlight the first harvested cluster (local positions in `remaining`).
        std::optional<IndexSubset> highlight;
        for (const auto* group : {&o.state.harvested, &o.state.small})
            for (const auto& h : *group)
                if (h.iteration == 0) {
                    std::vector<std::size_t> local;
                    for (std::size_t idx : h.members)
                        local.push_back(static_cast<std::size_t>(
                            std::lower_bound(first.remaining.begin(), first.remaining.end(), idx) - first.remaining.begin()));
                    highlight = IndexSubset(std::move(local));
                }
        const auto hists = component_histograms(projected, labels, 30, highlight);
        write_histogram_csv(out_dir / "component_histograms.csv", hists);
        std::ofstream svg(out_dir / "components.svg", std::ios::trunc);
        svg << render_histogram_svg(hists);
        summary.has_projection = true;
        summary.n_panels = hists.size();
        summary.files.push_back(out_dir / "component_histograms.csv");
        summary.files.push_back(out_dir / "components.svg");
    }

    if (auto side = square_side(d.dims()); side && *side >= 2) {
        const auto dir = out_dir / "mean_images";
        std::filesystem::create_directories(dir);
        double lo = 0.0, hi = 0.0;
        for (std::size_t i = 0; i < d.features().values().size(); ++i) {
            const double v = d.features().values()[i];
            if (i == 0 || v < lo) lo = v;
            if (i == 0 || v > hi) hi = v;
        }
        if (hi <= lo) hi = lo + 1.0;
        for (std::size_t c = 0; c < o.state.harvested.size(); ++c) {
            const auto mean = mean_image(d.features(), o.state.harvested[c].members);
            std::vector<std::uint8_t> px(mean.size());
            for (std::size_t j = 0; j < mean.size(); ++j)
                px[j] = static_cast<std::uint8_t>(std::lround(255.0 * (mean[j] - lo) / (hi - lo)));
            const auto path = dir / ("cluster_" + std::to_string(c) + ".png");
            write_png_gray(path, px, *side, *side);
            summary.files.push_back(path);
            ++summary.n_mean_images;
        }
    }
    return summary;
}

}  // namespace ich
