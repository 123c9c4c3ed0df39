#pragma once

// Binary feature file ("ICHF") and CSV import.
//
// Layout, all integers little-endian:
//   "ICHF" | u16 version=1 | u16 flags (bit0: labels) | u64 n_samples | u64 n_dims
//   | ids: n_samples x (u32 length + UTF-8 bytes)
//   | labels (if flagged): same encoding
//   | payload: n_samples*n_dims f32, row-major

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ich/core.hpp"

namespace ich {

namespace detail {

inline constexpr std::array<char, 4> kMagic{'I', 'C', 'H', 'F'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::uint16_t kFlagLabels = 1;

template <typename T>
void put_le(std::string& out, T value) {
    static_assert(std::is_unsigned_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

inline void put_string(std::string& out, const std::string& s) {
    if (s.size() > UINT32_MAX) throw DataError("string too long for feature file");
    put_le(out, static_cast<std::uint32_t>(s.size()));
    out += s;
}

class ByteReader {
public:
    explicit ByteReader(std::string bytes) : bytes_(std::move(bytes)) {}

    template <typename T>
    T get_le() {
        need(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            v |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += sizeof(T);
        return v;
    }

    std::string get_string() {
        const auto len = get_le<std::uint32_t>();
        need(len);
        std::string s = bytes_.substr(pos_, len);
        pos_ += len;
        return s;
    }

    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw DataError("truncated feature file");
    }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::string bytes_;
    std::size_t pos_ = 0;
};

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace detail

/// Serializes a dataset into the binary feature format.
inline std::string encode_feature_file(const LabeledDataset& dataset) {
    const FeatureMatrix& m = dataset.features();
    m.require_finite();
    std::string out(detail::kMagic.begin(), detail::kMagic.end());
    detail::put_le(out, detail::kFormatVersion);
    detail::put_le(out, static_cast<std::uint16_t>(dataset.has_labels() ? detail::kFlagLabels : 0));
    detail::put_le(out, static_cast<std::uint64_t>(m.rows()));
    detail::put_le(out, static_cast<std::uint64_t>(m.cols()));
    for (const auto& id : dataset.sample_ids()) detail::put_string(out, id);
    if (dataset.labels())
        for (const auto& l : *dataset.labels()) detail::put_string(out, l);
    out.reserve(out.size() + m.values().size() * 4);
    for (double v : m.values()) {
        const float f = static_cast<float>(v);
        if (!std::isfinite(f)) throw DataError("value overflows 32-bit float");
        detail::put_le(out, std::bit_cast<std::uint32_t>(f));
    }
    return out;
}

inline LabeledDataset decode_feature_file(std::string bytes) {
    detail::ByteReader in(std::move(bytes));
    std::array<char, 4> magic{};
    for (auto& c : magic) {
        if (in.remaining() == 0) throw DataError("unrecognized format");
        c = static_cast<char>(in.get_le<std::uint8_t>());
    }
    if (magic != detail::kMagic) throw DataError("unrecognized format");
    const auto version = in.get_le<std::uint16_t>();
    if (version != detail::kFormatVersion)
        throw DataError("unsupported feature file version " + std::to_string(version));
    const auto flags = in.get_le<std::uint16_t>();
    const auto n = in.get_le<std::uint64_t>();
    const auto d = in.get_le<std::uint64_t>();
    if (d == 0) throw DataError("feature file declares zero dimensions");
    // Each id needs at least its 4-byte length prefix.
    if (n > in.remaining() / 4) throw DataError("truncated feature file");

    std::vector<std::string> ids(n);
    for (auto& id : ids) id = in.get_string();
    std::optional<std::vector<std::string>> labels;
    if (flags & detail::kFlagLabels) {
        labels.emplace(n);
        for (auto& l : *labels) l = in.get_string();
    }
    if (d > 0 && n > in.remaining() / 4 / d) throw DataError("truncated feature file");
    std::vector<double> values(n * d);
    for (auto& v : values) v = std::bit_cast<float>(in.get_le<std::uint32_t>());
    if (in.remaining() != 0) throw DataError("trailing bytes after feature payload");

    FeatureMatrix m(n, d, std::move(values));
    m.require_finite();
    return LabeledDataset(std::move(m), std::move(ids), std::move(labels));
}

inline void write_feature_file(const LabeledDataset& dataset, const std::filesystem::path& path) {
    const std::string bytes = encode_feature_file(dataset);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

inline LabeledDataset read_feature_file(const std::filesystem::path& path) {
    return decode_feature_file(detail::slurp(path));
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

}  // namespace detail

/// Reads a CSV with header `id[,label],f0,f1,...`.
inline LabeledDataset read_csv_features(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty CSV '" + path.string() + "'");
    const auto header = detail::split_csv_line(line);
    if (header.empty() || header[0] != "id") throw DataError("CSV header must start with 'id'");
    const bool has_labels = header.size() > 1 && header[1] == "label";
    const std::size_t first_value = has_labels ? 2 : 1;
    if (header.size() <= first_value) throw DataError("CSV has no feature columns");
    const std::size_t d = header.size() - first_value;

    std::vector<std::string> ids;
    std::vector<std::string> labels;
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw DataError("CSV line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields");
        ids.push_back(fields[0]);
        if (has_labels) labels.push_back(fields[1]);
        for (std::size_t c = first_value; c < fields.size(); ++c) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(fields[c], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != fields[c].size())
                throw DataError("CSV line " + std::to_string(line_no) + ": bad number '" + fields[c] + "'");
            values.push_back(v);
        }
    }
    FeatureMatrix m(ids.size(), d, std::move(values));
    m.require_finite();
    std::optional<std::vector<std::string>> label_opt;
    if (has_labels) label_opt = std::move(labels);
    return LabeledDataset(std::move(m), std::move(ids), std::move(label_opt));
}

/// Dispatches on extension: `.csv` is imported, anything else is read as ICHF.
inline LabeledDataset load_features(const std::filesystem::path& path) {
    if (path.extension() == ".csv") return read_csv_features(path);
    return read_feature_file(path);
}

}  // namespace ich
