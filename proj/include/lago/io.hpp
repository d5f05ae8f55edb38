#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "lago/distance.hpp"
#include "lago/types.hpp"

// File formats.
//
// Binary container: 8-byte magic ("LAGOEMB1" for embeddings, "LAGOMAP1" for
// alignment maps), then little-endian u32 rows, u32 cols, then row-major
// IEEE-754 binary64 values.
//
// CSV embeddings: one sample per row, comma-separated, no header.

namespace lago {

enum class MatrixKind { embedding, alignment_map };

namespace detail {

inline const char* magic_of(MatrixKind kind) {
    return kind == MatrixKind::embedding ? "LAGOEMB1" : "LAGOMAP1";
}

inline void put_u32_le(std::ostream& out, std::uint32_t v) {
    const std::array<unsigned char, 4> b{
        static_cast<unsigned char>(v & 0xFF), static_cast<unsigned char>((v >> 8) & 0xFF),
        static_cast<unsigned char>((v >> 16) & 0xFF),
        static_cast<unsigned char>((v >> 24) & 0xFF)};
    out.write(reinterpret_cast<const char*>(b.data()), 4);
}

inline std::uint32_t get_u32_le(std::istream& in) {
    std::array<unsigned char, 4> b{};
    in.read(reinterpret_cast<char*>(b.data()), 4);
    if (!in) throw DataError("truncated binary matrix header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f64_le(std::ostream& out, double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, 8);
    std::array<unsigned char, 8> b{};
    for (int k = 0; k < 8; ++k) b[static_cast<std::size_t>(k)] =
        static_cast<unsigned char>((bits >> (8 * k)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b.data()), 8);
}

inline double get_f64_le(std::istream& in) {
    std::array<unsigned char, 8> b{};
    in.read(reinterpret_cast<char*>(b.data()), 8);
    if (!in) throw DataError("truncated binary matrix payload");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(k)])
                                        << (8 * k);
    double v = 0.0;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace detail

inline void write_matrix_binary(std::ostream& out, const Matrix& m, MatrixKind kind) {
    out.write(detail::magic_of(kind), 8);
    detail::put_u32_le(out, static_cast<std::uint32_t>(m.rows()));
    detail::put_u32_le(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) detail::put_f64_le(out, m(r, c));
    if (!out) throw DataError("failed writing binary matrix");
}

inline Matrix read_matrix_binary(std::istream& in, MatrixKind kind) {
    char magic[8] = {};
    in.read(magic, 8);
    if (!in || std::memcmp(magic, detail::magic_of(kind), 8) != 0)
        throw DataError(std::string("bad magic; expected ") + detail::magic_of(kind));
    const std::uint32_t rows = detail::get_u32_le(in);
    const std::uint32_t cols = detail::get_u32_le(in);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::uint32_t r = 0; r < rows; ++r)
        for (std::uint32_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = detail::get_f64_le(in);
    if (!m.allFinite()) throw DataError("non-finite entries in binary matrix");
    return m;
}

inline void write_matrix_binary_file(const std::string& path, const Matrix& m, MatrixKind kind) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    write_matrix_binary(out, m, kind);
}

inline Matrix read_matrix_binary_file(const std::string& path, MatrixKind kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open matrix file '" + path + "'");
    return read_matrix_binary(in, kind);
}

inline void write_matrix_csv(std::ostream& out, const Matrix& m) {
    std::ostringstream buf;
    buf.precision(17);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) buf << ',';
            buf << m(r, c);
        }
        buf << '\n';
    }
    out << buf.str();
    if (!out) throw DataError("failed writing CSV matrix");
}

inline Matrix read_matrix_csv(std::istream& in) {
    std::vector<std::vector<double>> rows;
    for (std::string line; std::getline(in, line);) {
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_line(line);
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields)
            row.push_back(detail::parse_double(f, "CSV row " + std::to_string(rows.size() + 1)));
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError("ragged CSV: row " + std::to_string(rows.size() + 1) + " has " +
                            std::to_string(row.size()) + " fields");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError("empty CSV matrix");
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows.front().size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    if (!m.allFinite()) throw DataError("non-finite entries in CSV matrix");
    return m;
}

inline void write_matrix_csv_file(const std::string& path, const Matrix& m) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    write_matrix_csv(out, m);
}

inline Matrix read_matrix_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open matrix file '" + path + "'");
    return read_matrix_csv(in);
}

} // namespace lago
