#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace ich;

namespace {

std::vector<double> defect_weights(const SyntheticWaferMap& m) {
    std::vector<double> w(m.grid.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = m.grid[i] == Cell::defect ? 1.0 : 0.0;
    return w;
}

std::vector<double> disc_weights(std::size_t size) {
    std::vector<double> w(size * size, 1.0);
    return w;
}

// Defect fraction of disc cells whose radius lies in [lo, hi).
double band_fraction(const SyntheticWaferMap& m, double lo, double hi) {
    std::size_t cells = 0, defects = 0;
    for (std::size_t r = 0; r < m.size; ++r)
        for (std::size_t c = 0; c < m.size; ++c) {
            if (!SyntheticWaferMap::inside_disc(r, c, m.size)) continue;
            const auto [x, y] = SyntheticWaferMap::rel(r, c, m.size);
            const double rad = std::sqrt(x * x + y * y);
            if (rad < lo || rad >= hi) continue;
            ++cells;
            defects += m.at(r, c) == Cell::defect;
        }
    return cells ? static_cast<double>(defects) / static_cast<double>(cells) : 0.0;
}

}  // namespace

TEST(Synthgen, CenterDefectsAreCentral) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto m = generate_map("Center", 64, seed);
        EXPECT_LT(weighted_center_distance(defect_weights(m), 64), weighted_center_distance(disc_weights(64), 64));
    }
}

TEST(Synthgen, DonutAndRingHaveEmptyCenters) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        for (const char* label : {"Donut", "Ring"}) {
            const auto m = generate_map(label, 64, seed);
            EXPECT_LT(band_fraction(m, 0.0, 0.2), 0.1) << label << " seed " << seed;
        }
        EXPECT_GT(band_fraction(generate_map("Ring", 64, seed), 0.9, 1.01), 0.2);
    }
}

TEST(Synthgen, EdgeLocTouchesRim) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto m = generate_map("Edge-Loc", 64, seed);
        EXPECT_GT(band_fraction(m, 0.9, 1.01), band_fraction(m, 0.0, 0.5)) << "seed " << seed;
    }
}

TEST(Synthgen, DefectFractionOrdering) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const double nf = generate_map("Near-Full", 64, seed).defect_fraction();
        const double rnd = generate_map("Random", 64, seed).defect_fraction();
        EXPECT_GT(nf, rnd);
        EXPECT_GT(rnd, kBackgroundDefectRate);
    }
}

TEST(Synthgen, Deterministic) {
    for (const auto& label : defect_classes()) {
        const auto a = generate_map(label, 48, 77);
        const auto b = generate_map(label, 48, 77);
        EXPECT_EQ(a.grid, b.grid) << label;
        EXPECT_EQ(a.params, b.params);
    }
    EXPECT_NE(generate_map("Scratch", 48, 1).grid, generate_map("Scratch", 48, 2).grid);
}

TEST(Synthgen, EncodingLevels) {
    const auto m = generate_map("Loc", 32, 3);
    const auto f = m.features();
    const auto p = m.pixels();
    for (std::size_t i = 0; i < f.size(); ++i) {
        const bool outside = !SyntheticWaferMap::inside_disc(i / 32, i % 32, 32);
        EXPECT_EQ(outside, m.grid[i] == Cell::outside);
        EXPECT_TRUE(f[i] == 0.0 || f[i] == 0.5 || f[i] == 1.0);
        EXPECT_EQ(p[i], f[i] == 0.0 ? 0 : f[i] == 0.5 ? 128 : 255);
    }
}

TEST(Synthgen, DatasetShapeAndLabels) {
    const auto d = generate_dataset({{"Center", 10}, {"Ring", 10}}, 64, 0);
    EXPECT_EQ(d.size(), 20u);
    EXPECT_EQ(d.dims(), 4096u);
    std::set<std::string> labels(d.labels()->begin(), d.labels()->end());
    EXPECT_EQ(labels, (std::set<std::string>{"Center", "Ring"}));
    EXPECT_EQ(generate_dataset({{"Center", 0}}, 64, 0).size(), 0u);
    EXPECT_THROW(generate_dataset({{"Blob", 1}}, 64, 0), ConfigError);
    EXPECT_THROW(generate_map("Center", 8, 0), ConfigError);
}

TEST(Synthgen, ImageArchiveAndManifest) {
    const auto dir = testing_support::scratch_dir("synth_images");
    const auto d = generate_dataset({{"Donut", 2}, {"Scratch", 1}}, 32, 5, dir / "images");
    const auto manifest = testing_support::read_text(dir / "images" / "manifest.csv");
    EXPECT_EQ(manifest.rfind("filename,label\n", 0), 0u);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto file = dir / "images" / (d.sample_ids()[i] + ".png");
        ASSERT_TRUE(std::filesystem::exists(file)) << file;
        const auto bytes = testing_support::read_text(file);
        EXPECT_EQ(bytes.substr(0, 8), std::string("\x89PNG\r\n\x1a\n", 8));
        EXPECT_NE(manifest.find(file.filename().string() + "," + (*d.labels())[i]), std::string::npos);
    }
}

TEST(Synthgen, BenchmarkIsNonDegenerateForOtc) {
    std::map<std::string, std::size_t> counts;
    for (const auto& c : defect_classes()) counts[c] = 40;
    const auto d = generate_dataset(counts, 64, 0);
    HarvestConfig c;
    c.n_pca = 10;
    const auto a = run_otc(d, c, 16);
    EXPECT_GE(homogeneity_of(*d.labels(), a.members(), a.cluster_of()), 0.5);
}
