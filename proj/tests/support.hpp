#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "ich/ich.hpp"
#include "oracles.hpp"

namespace testing_support {

inline oracle::Matrix to_rows(const ich::FeatureMatrix& m) {
    oracle::Matrix out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) out[r].assign(m.row(r).begin(), m.row(r).end());
    return out;
}

inline ich::FeatureMatrix from_rows(const oracle::Matrix& rows) {
    std::vector<double> flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    return ich::FeatureMatrix(rows.size(), rows.front().size(), std::move(flat));
}

/// `per_blob` points around each of three far-apart centers in `dims`
/// dimensions, labeled "A", "B", "C".
inline ich::LabeledDataset three_blobs(std::size_t per_blob, std::size_t dims, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> nd(0.0, 0.3);
    const std::vector<std::vector<double>> centers = {
        std::vector<double>(dims, 0.0), std::vector<double>(dims, 20.0), [&] {
            std::vector<double> c(dims, 0.0);
            for (std::size_t j = 0; j < dims; j += 2) c[j] = -20.0;
            return c;
        }()};
    const char* names[] = {"A", "B", "C"};
    std::vector<double> values;
    std::vector<std::string> labels;
    for (std::size_t b = 0; b < 3; ++b)
        for (std::size_t i = 0; i < per_blob; ++i) {
            for (std::size_t j = 0; j < dims; ++j) values.push_back(centers[b][j] + nd(g));
            labels.push_back(names[b]);
        }
    return ich::LabeledDataset::with_generated_ids(ich::FeatureMatrix(3 * per_blob, dims, std::move(values)),
                                                   std::move(labels));
}

/// Fresh, empty scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("ich_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace testing_support
