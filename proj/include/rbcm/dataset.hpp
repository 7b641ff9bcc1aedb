#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "rbcm/errors.hpp"
#include "rbcm/linalg.hpp"
#include "rbcm/rng.hpp"

namespace rbcm {

// Feature matrix (one sample per column) plus 0-based labels.
struct LabeledDataset {
    Matrix features;  // d x N
    std::vector<std::size_t> labels;
    std::size_t class_count = 0;

    std::size_t dim() const { return features.rows(); }
    std::size_t size() const { return features.cols(); }

    std::vector<std::size_t> class_sizes() const {
        std::vector<std::size_t> sizes(class_count, 0);
        for (std::size_t l : labels) ++sizes[l];
        return sizes;
    }

    void validate() const {
        if (labels.size() != features.cols())
            throw DimensionMismatch("dataset has " + std::to_string(features.cols()) +
                                    " feature columns but " + std::to_string(labels.size()) +
                                    " labels");
        if (class_count == 0) throw DimensionMismatch("dataset has no classes");
        std::vector<std::size_t> sizes(class_count, 0);
        for (std::size_t l : labels) {
            if (l >= class_count)
                throw DimensionMismatch("label " + std::to_string(l) + " outside [0, " +
                                        std::to_string(class_count) + ")");
            ++sizes[l];
        }
        for (std::size_t c = 0; c < class_count; ++c)
            if (sizes[c] == 0) throw EmptyClass(c);
    }
};

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr char kBinaryMagic[4] = {'R', 'B', 'C', 'M'};
inline constexpr std::uint32_t kBinaryVersion = 1;

inline std::uint64_t read_u64le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline std::uint32_t read_u32le(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline void write_u64le(std::ofstream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline void write_u32le(std::ofstream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline bool looks_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    char magic[4] = {};
    is.read(magic, 4);
    return is.gcount() == 4 && std::memcmp(magic, kBinaryMagic, 4) == 0;
}

}  // namespace detail

// CSV features: d rows x N comma-separated decimal columns.
inline Matrix load_features_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError(path, "cannot open file");
    std::vector<double> values;
    std::size_t cols = 0, rows = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() && is.peek() == std::char_traits<char>::eof()) break;
        std::size_t field_count = 0;
        const char* p = line.c_str();
        while (true) {
            char* end = nullptr;
            const double v = std::strtod(p, &end);
            if (end == p)
                throw ParseError(path + ":" + std::to_string(line_no),
                                 "expected a number at column " + std::to_string(field_count + 1));
            values.push_back(v);
            ++field_count;
            p = end;
            while (*p == ' ' || *p == '\t') ++p;
            if (*p == ',') {
                ++p;
                continue;
            }
            if (*p == '\0' || *p == '\r') break;
            throw ParseError(path + ":" + std::to_string(line_no),
                             std::string("unexpected character '") + *p + "'");
        }
        if (rows == 0) {
            cols = field_count;
        } else if (field_count != cols) {
            throw DimensionMismatch(path + ":" + std::to_string(line_no) + ": row has " +
                                    std::to_string(field_count) + " fields, expected " +
                                    std::to_string(cols));
        }
        ++rows;
    }
    if (rows == 0 || cols == 0) throw ParseError(path, "no data rows");
    try {
        return Matrix::from_data(rows, cols, std::move(values));
    } catch (const DimensionMismatch& e) {
        throw ParseError(path, e.what());
    }
}

// Binary features: magic "RBCM", version u32 LE, d u64 LE, N u64 LE, then
// d*N little-endian float64 values in column-major order.
inline Matrix load_features_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError(path, "cannot open file");
    unsigned char header[24];
    is.read(reinterpret_cast<char*>(header), sizeof(header));
    if (is.gcount() != sizeof(header) || std::memcmp(header, detail::kBinaryMagic, 4) != 0)
        throw ParseError(path + ":offset 0", "bad magic, expected 'RBCM'");
    const std::uint32_t version = detail::read_u32le(header + 4);
    if (version != detail::kBinaryVersion)
        throw ParseError(path + ":offset 4", "unsupported version " + std::to_string(version));
    const std::uint64_t d = detail::read_u64le(header + 8);
    const std::uint64_t n = detail::read_u64le(header + 16);
    if (d == 0 || n == 0 || d > (1ull << 32) || n > (1ull << 32))
        throw ParseError(path + ":offset 8", "implausible dimensions " + std::to_string(d) + "x" +
                                                 std::to_string(n));
    std::vector<unsigned char> payload(static_cast<std::size_t>(d * n) * 8);
    is.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (is.gcount() != static_cast<std::streamsize>(payload.size()))
        throw ParseError(path + ":offset 24", "truncated payload");
    Matrix m(static_cast<std::size_t>(d), static_cast<std::size_t>(n));
    const unsigned char* p = payload.data();
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t r = 0; r < d; ++r, p += 8)
            m(r, c) = std::bit_cast<double>(detail::read_u64le(p));
    if (!all_finite(m.data())) throw ParseError(path, "payload contains non-finite values");
    return m;
}

inline Matrix load_features(const std::string& path) {
    return detail::looks_binary(path) ? load_features_binary(path) : load_features_csv(path);
}

// Labels: one 0-based integer per line.
inline std::vector<std::size_t> load_labels(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError(path, "cannot open file");
    std::vector<std::size_t> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        char* end = nullptr;
        const long long v = std::strtoll(line.c_str(), &end, 10);
        if (end == line.c_str() || v < 0)
            throw ParseError(path + ":" + std::to_string(line_no),
                             "expected a non-negative integer label");
        labels.push_back(static_cast<std::size_t>(v));
    }
    if (labels.empty()) throw ParseError(path, "no labels");
    return labels;
}

inline LabeledDataset load_dataset(const std::string& features_path,
                                   const std::string& labels_path) {
    LabeledDataset ds;
    ds.features = load_features(features_path);
    ds.labels = load_labels(labels_path);
    if (ds.labels.size() != ds.features.cols())
        throw DimensionMismatch("features have " + std::to_string(ds.features.cols()) +
                                " columns but labels file lists " +
                                std::to_string(ds.labels.size()) + " entries");
    std::size_t max_label = 0;
    for (std::size_t l : ds.labels) max_label = std::max(max_label, l);
    ds.class_count = max_label + 1;
    ds.validate();
    return ds;
}

inline void save_features_csv(const std::string& path, const Matrix& m) {
    std::ofstream os(path);
    if (!os) throw ParseError(path, "cannot open file for writing");
    char buf[32];
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
            os << buf << (c + 1 == m.cols() ? "" : ",");
        }
        os << '\n';
    }
}

inline void save_features_binary(const std::string& path, const Matrix& m) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ParseError(path, "cannot open file for writing");
    os.write(detail::kBinaryMagic, 4);
    detail::write_u32le(os, detail::kBinaryVersion);
    detail::write_u64le(os, m.rows());
    detail::write_u64le(os, m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c)
        for (std::size_t r = 0; r < m.rows(); ++r)
            detail::write_u64le(os, std::bit_cast<std::uint64_t>(m(r, c)));
}

inline void save_labels(const std::string& path, const std::vector<std::size_t>& labels) {
    std::ofstream os(path);
    if (!os) throw ParseError(path, "cannot open file for writing");
    for (std::size_t l : labels) os << l << '\n';
}

// ---------------------------------------------------------------------------
// Splitting, noise, synthetic data
// ---------------------------------------------------------------------------

// First k samples of every class (in file order) become training data, the
// rest test data; within-class order is preserved bit-exactly.
inline std::pair<LabeledDataset, LabeledDataset> split_first_k(const LabeledDataset& ds,
                                                               std::size_t k) {
    ds.validate();
    if (k == 0) throw DimensionMismatch("split_first_k: k must be at least 1");
    const auto sizes = ds.class_sizes();
    for (std::size_t c = 0; c < sizes.size(); ++c)
        if (sizes[c] <= k) throw ClassTooSmall(c, sizes[c], k);

    std::vector<std::size_t> train_idx, test_idx;
    std::vector<std::size_t> seen(ds.class_count, 0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const std::size_t c = ds.labels[i];
        (seen[c]++ < k ? train_idx : test_idx).push_back(i);
    }

    auto take = [&](const std::vector<std::size_t>& idx) {
        LabeledDataset out;
        out.features = Matrix(ds.dim(), idx.size());
        out.labels.reserve(idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            for (std::size_t r = 0; r < ds.dim(); ++r)
                out.features(r, j) = ds.features(r, idx[j]);
            out.labels.push_back(ds.labels[idx[j]]);
        }
        out.class_count = ds.class_count;
        return out;
    };
    return {take(train_idx), take(test_idx)};
}

// X + E with E_ij ~ N(0, variance), derived per entry from (seed, row-major
// index) so the result is independent of threading and call order.
inline Matrix add_gaussian_noise(const Matrix& X, double variance, std::uint64_t seed) {
    if (variance < 0) throw DimensionMismatch("add_gaussian_noise: variance must be >= 0");
    if (variance == 0.0) return X;
    const double sigma = std::sqrt(variance);
    Matrix out = X;
    for (std::size_t i = 0; i < out.data().size(); ++i)
        out.data()[i] += sigma * gaussian(seed, i);
    return out;
}

// Seeded Gaussian blobs: class centers drawn from N(0, separation^2 I), each
// sample its center plus unit Gaussian noise. Samples are grouped by class.
inline LabeledDataset make_blobs(std::size_t classes, std::size_t dim, std::size_t per_class,
                                 double separation, std::uint64_t seed) {
    if (classes < 2 || dim == 0 || per_class == 0)
        throw DimensionMismatch("make_blobs: need >= 2 classes and positive dim/per_class");
    const std::uint64_t center_seed = derive_seed(seed, 0x63656e74);  // "cent"
    const std::uint64_t sample_seed = derive_seed(seed, 0x73616d70);  // "samp"

    LabeledDataset ds;
    ds.class_count = classes;
    ds.features = Matrix(dim, classes * per_class);
    ds.labels.resize(classes * per_class);
    for (std::size_t c = 0; c < classes; ++c) {
        Vector center(dim);
        for (std::size_t r = 0; r < dim; ++r)
            center[r] = separation * gaussian(center_seed, c * dim + r);
        for (std::size_t s = 0; s < per_class; ++s) {
            const std::size_t col = c * per_class + s;
            ds.labels[col] = c;
            for (std::size_t r = 0; r < dim; ++r)
                ds.features(r, col) = center[r] + gaussian(sample_seed, col * dim + r);
        }
    }
    return ds;
}

}  // namespace rbcm
