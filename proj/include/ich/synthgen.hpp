#pragma once

// Synthetic wafer maps for the eight defect classes.
//
// A map is an S x S grid; cells outside the inscribed disc are "outside",
// the rest "pass" or "defect". Geometry uses only +,-,*,/ and sqrt on
// doubles drawn from ich::Rng, so maps are reproducible across platforms.
// Shape parameter ranges are invented; they only aim at the qualitative
// structure of real wafer-map classes (some uniform, some highly variable).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ich/core.hpp"
#include "ich/png.hpp"
#include "ich/random.hpp"

namespace ich {

enum class Cell : std::uint8_t { outside = 0, pass = 1, defect = 2 };

inline const std::array<std::string, 8>& defect_classes() {
    static const std::array<std::string, 8> names{"Center", "Donut",  "Edge-Loc", "Loc",
                                                  "Near-Full", "Random", "Ring", "Scratch"};
    return names;
}

inline bool is_defect_class(const std::string& label) {
    for (const auto& c : defect_classes())
        if (c == label) return true;
    return false;
}

inline constexpr std::size_t kMinMapSize = 16;
inline constexpr double kBackgroundDefectRate = 0.02;

struct SyntheticWaferMap {
    std::size_t size = 0;
    std::vector<Cell> grid;  ///< row-major, size x size
    std::string label;
    std::uint64_t seed = 0;
    std::map<std::string, double> params;  ///< shape parameters, for inspection

    Cell at(std::size_t row, std::size_t col) const { return grid[row * size + col]; }

    /// Cell center relative to the wafer center, in units of the radius.
    static std::pair<double, double> rel(std::size_t row, std::size_t col, std::size_t size) {
        const double half = static_cast<double>(size) / 2.0;
        return {(static_cast<double>(col) + 0.5 - half) / half, (static_cast<double>(row) + 0.5 - half) / half};
    }

    static bool inside_disc(std::size_t row, std::size_t col, std::size_t size) {
        // (2c+1-S)^2 + (2r+1-S)^2 <= S^2, exact in integers.
        const long long s = static_cast<long long>(size);
        const long long dx = 2 * static_cast<long long>(col) + 1 - s;
        const long long dy = 2 * static_cast<long long>(row) + 1 - s;
        return dx * dx + dy * dy <= s * s;
    }

    double defect_fraction() const {
        std::size_t disc = 0, defects = 0;
        for (Cell c : grid) {
            if (c != Cell::outside) ++disc;
            if (c == Cell::defect) ++defects;
        }
        return disc ? static_cast<double>(defects) / static_cast<double>(disc) : 0.0;
    }

    /// Feature encoding: outside 0, pass 0.5, defect 1.
    std::vector<double> features() const {
        std::vector<double> f(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            f[i] = grid[i] == Cell::outside ? 0.0 : grid[i] == Cell::pass ? 0.5 : 1.0;
        return f;
    }

    std::vector<std::uint8_t> pixels() const {
        std::vector<std::uint8_t> p(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            p[i] = grid[i] == Cell::outside ? 0 : grid[i] == Cell::pass ? 128 : 255;
        return p;
    }
};

namespace detail {

struct Vec2 {
    double x, y;
};

inline Vec2 random_direction(Rng& rng) {
    for (;;) {
        const double x = rng.uniform(-1.0, 1.0);
        const double y = rng.uniform(-1.0, 1.0);
        const double r2 = x * x + y * y;
        if (r2 > 1e-4 && r2 <= 1.0) {
            const double r = std::sqrt(r2);
            return {x / r, y / r};
        }
    }
}

inline Vec2 random_point_in_disc(Rng& rng, double radius) {
    for (;;) {
        const double x = rng.uniform(-1.0, 1.0);
        const double y = rng.uniform(-1.0, 1.0);
        if (x * x + y * y <= 1.0) return {x * radius, y * radius};
    }
}

inline double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace detail

/// Generates one map; deterministic in (label, size, seed).
inline SyntheticWaferMap generate_map(const std::string& label, std::size_t size, std::uint64_t seed) {
    if (!is_defect_class(label)) throw ConfigError("unknown defect class '" + label + "'");
    if (size < kMinMapSize)
        throw ConfigError("map size must be at least " + std::to_string(kMinMapSize));

    SyntheticWaferMap map;
    map.size = size;
    map.label = label;
    map.seed = seed;
    map.grid.assign(size * size, Cell::outside);
    Rng rng(seed);

    // Defect predicate and fill probability for the chosen class; the
    // predicate works on wafer-relative coordinates (radius 1).
    std::function<bool(double, double)> in_shape = [](double, double) { return false; };
    double fill = 0.9;
    double density = 0.0;  // for Random / Near-Full: uniform density over the disc
    const double cell = 2.0 / static_cast<double>(size);

    if (label == "Center") {
        const double rho = rng.uniform(0.15, 0.35);
        const double cx = rng.uniform(-0.04, 0.04), cy = rng.uniform(-0.04, 0.04);
        map.params = {{"radius", rho}, {"cx", cx}, {"cy", cy}};
        in_shape = [=](double x, double y) { return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= rho * rho; };
    } else if (label == "Donut") {
        const double inner = rng.uniform(0.25, 0.45);
        const double outer = inner + rng.uniform(0.15, 0.3);
        map.params = {{"inner", inner}, {"outer", outer}};
        in_shape = [=](double x, double y) {
            const double r2 = x * x + y * y;
            return r2 >= inner * inner && r2 <= outer * outer;
        };
    } else if (label == "Ring") {
        const double inner = rng.uniform(0.78, 0.88);
        const bool arc = rng.bernoulli(0.35);
        const detail::Vec2 dir = detail::random_direction(rng);
        const double min_cos = arc ? rng.uniform(-0.5, 0.5) : -2.0;
        map.params = {{"inner", inner}, {"arc", arc ? 1.0 : 0.0}, {"min_cos", min_cos}};
        in_shape = [=](double x, double y) {
            const double r2 = x * x + y * y;
            if (r2 < inner * inner) return false;
            const double r = std::sqrt(r2);
            return (x * dir.x + y * dir.y) / r >= min_cos;
        };
    } else if (label == "Edge-Loc") {
        const detail::Vec2 dir = detail::random_direction(rng);
        const double radius = rng.uniform(0.2, 0.35);
        const double cx = 0.95 * dir.x, cy = 0.95 * dir.y;
        map.params = {{"radius", radius}, {"cx", cx}, {"cy", cy}};
        fill = 0.85;
        in_shape = [=](double x, double y) { return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius; };
    } else if (label == "Loc") {
        const detail::Vec2 c = detail::random_point_in_disc(rng, 0.6);
        const double radius = rng.uniform(0.15, 0.3);
        map.params = {{"radius", radius}, {"cx", c.x}, {"cy", c.y}};
        fill = 0.85;
        in_shape = [=](double x, double y) { return (x - c.x) * (x - c.x) + (y - c.y) * (y - c.y) <= radius * radius; };
    } else if (label == "Scratch") {
        std::vector<detail::Vec2> pts{detail::random_point_in_disc(rng, 0.7)};
        detail::Vec2 dir = detail::random_direction(rng);
        const std::size_t segments = 2 + rng.below(2);
        for (std::size_t s = 0; s < segments; ++s) {
            const double len = rng.uniform(0.3, 0.6);
            pts.push_back({pts.back().x + len * dir.x, pts.back().y + len * dir.y});
            const detail::Vec2 jitter = detail::random_direction(rng);
            const double nx = dir.x + 0.35 * jitter.x, ny = dir.y + 0.35 * jitter.y;
            const double nr = std::sqrt(nx * nx + ny * ny);
            dir = {nx / nr, ny / nr};
        }
        map.params = {{"segments", static_cast<double>(segments)}};
        const double width = 1.25 * cell;
        in_shape = [pts, width](double x, double y) {
            for (std::size_t i = 1; i < pts.size(); ++i)
                if (detail::segment_distance({x, y}, pts[i - 1], pts[i]) <= width) return true;
            return false;
        };
    } else if (label == "Random") {
        density = rng.uniform(0.05, 0.15);
        map.params = {{"density", density}};
    } else {  // Near-Full
        density = rng.uniform(0.6, 0.9);
        map.params = {{"density", density}};
    }

    for (std::size_t r = 0; r < size; ++r)
        for (std::size_t c = 0; c < size; ++c) {
            if (!SyntheticWaferMap::inside_disc(r, c, size)) continue;
            const auto [x, y] = SyntheticWaferMap::rel(r, c, size);
            bool defect = rng.bernoulli(kBackgroundDefectRate);
            if (density > 0.0) defect = rng.bernoulli(density) || defect;
            if (in_shape(x, y)) defect = rng.bernoulli(fill) || defect;
            map.grid[r * size + c] = defect ? Cell::defect : Cell::pass;
        }
    return map;
}

/// Per-map seed inside a dataset.
inline std::uint64_t map_seed(std::uint64_t dataset_seed, const std::string& label, std::size_t index) {
    std::uint64_t class_no = 0;
    for (std::size_t i = 0; i < defect_classes().size(); ++i)
        if (defect_classes()[i] == label) class_no = i;
    return mix_seed(dataset_seed, class_no * 1'000'003ULL + index);
}

inline std::string map_file_name(const std::string& label, std::size_t index, std::uint64_t seed) {
    return label + "_" + std::to_string(index) + "_" + std::to_string(seed) + ".png";
}

/// Labeled dataset of flattened maps, classes in alphabetical order. When
/// `image_dir` is given, every map is also written there as a PNG together
/// with manifest.csv (filename,label).
inline LabeledDataset generate_dataset(const std::map<std::string, std::size_t>& class_counts, std::size_t size,
                                       std::uint64_t seed,
                                       const std::optional<std::filesystem::path>& image_dir = std::nullopt) {
    for (const auto& [label, count] : class_counts)
        if (!is_defect_class(label)) throw ConfigError("unknown defect class '" + label + "'");
    if (size < kMinMapSize) throw ConfigError("map size must be at least " + std::to_string(kMinMapSize));

    std::ofstream manifest;
    if (image_dir) {
        std::filesystem::create_directories(*image_dir);
        manifest.open(*image_dir / "manifest.csv", std::ios::trunc);
        if (!manifest) throw DataError("cannot write image manifest in '" + image_dir->string() + "'");
        manifest << "filename,label\n";
    }

    std::size_t total = 0;
    for (const auto& [label, count] : class_counts) total += count;
    std::vector<double> values;
    values.reserve(total * size * size);
    std::vector<std::string> ids, labels;
    for (const auto& [label, count] : class_counts)
        for (std::size_t i = 0; i < count; ++i) {
            const SyntheticWaferMap map = generate_map(label, size, map_seed(seed, label, i));
            const auto f = map.features();
            values.insert(values.end(), f.begin(), f.end());
            const std::string file = map_file_name(label, i, seed);
            ids.push_back(file.substr(0, file.size() - 4));
            labels.push_back(label);
            if (image_dir) {
                write_png_gray(*image_dir / file, map.pixels(), size, size);
                manifest << file << ',' << label << '\n';
            }
        }
    return LabeledDataset(FeatureMatrix(total, size * size, std::move(values)), std::move(ids), std::move(labels));
}

/// Mean distance to the wafer center (radius units) of cells weighted by
/// `weight` (row-major, size x size), restricted to the disc.
inline double weighted_center_distance(const std::vector<double>& weight, std::size_t size) {
    double num = 0.0, den = 0.0;
    for (std::size_t r = 0; r < size; ++r)
        for (std::size_t c = 0; c < size; ++c) {
            if (!SyntheticWaferMap::inside_disc(r, c, size)) continue;
            const auto [x, y] = SyntheticWaferMap::rel(r, c, size);
            const double w = weight[r * size + c];
            num += w * std::sqrt(x * x + y * y);
            den += w;
        }
    return den > 0 ? num / den : 0.0;
}

}  // namespace ich
